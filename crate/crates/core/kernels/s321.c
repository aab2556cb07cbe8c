#ifndef LEN
#define LEN 32000
#endif
typedef float real_t;
real_t a[LEN], b[LEN];

void s321(void)
{
    for (int i = 1; i < LEN; i++) {
        a[i] += a[i-1] * b[i];
    }
}
