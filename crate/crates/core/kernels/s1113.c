#ifndef LEN
#define LEN 32000
#endif
typedef float real_t;
real_t a[LEN], b[LEN];

void s1113(void)
{
    for (int i = 0; i < LEN; i++) {
        a[i] = a[LEN/2] + b[i];
    }
}
