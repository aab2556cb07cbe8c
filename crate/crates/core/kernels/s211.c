#ifndef LEN
#define LEN 32000
#endif
typedef float real_t;
real_t a[LEN], b[LEN], c[LEN], d[LEN], e[LEN];

void s211(void)
{
    for (int i = 1; i < LEN - 1; i++) {
        a[i] = b[i-1] + c[i] * d[i];
        b[i] = b[i+1] - e[i] * d[i];
    }
}
