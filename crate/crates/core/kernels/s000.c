#ifndef LEN
#define LEN 32000
#endif
typedef float real_t;
real_t a[LEN], b[LEN];

void s000(void)
{
    for (int i = 0; i < LEN; i++) {
        a[i] = b[i] + 1.0f;
    }
}
