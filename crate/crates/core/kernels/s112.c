#ifndef LEN
#define LEN 32000
#endif
typedef float real_t;
real_t a[LEN], b[LEN];

void s112(void)
{
    for (int i = LEN - 2; i >= 0; i--) {
        a[i+1] = a[i] + b[i];
    }
}
