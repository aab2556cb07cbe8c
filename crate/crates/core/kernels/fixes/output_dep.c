#ifndef LEN
#define LEN 32000
#endif
typedef float real_t;
real_t a[LEN], b[LEN], c[LEN];

void output_dep(void)
{
    for (int i = 0; i < LEN - 1; i++) {
        a[i] = b[i] + c[i];
    }
    a[LEN - 1] = c[LEN - 2] * 2.0f;
}
