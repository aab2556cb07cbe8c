#ifndef LEN
#define LEN 32000
#endif
typedef float real_t;
real_t a[LEN], b[LEN], c[LEN], d[LEN];

void s241(void)
{
    for (int i = 0; i < LEN - 1; i++) {
        a[i] = b[i] * c[i] * d[i];
        b[i] = a[i] * a[i+1] * d[i];
    }
}
