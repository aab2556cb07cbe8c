#ifndef LEN
#define LEN 32000
#endif
typedef float real_t;
real_t a[LEN], b[LEN], c[LEN];

void guarded_shift(void)
{
    for (int i = 0; i < LEN - 1; i++) {
        if (b[i] > 1.5f)
            a[i] = a[i+1] + c[i];
    }
}
