#ifndef LEN
#define LEN 32000
#endif
typedef float real_t;
real_t a[LEN], b[LEN], c[LEN];

void s482(void)
{
    for (int i = 0; i < LEN; i++) {
        a[i] += b[i] * c[i];
        if (c[i] > b[i]) break;
    }
}
