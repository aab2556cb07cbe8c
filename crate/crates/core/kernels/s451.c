#ifndef LEN
#define LEN 32000
#endif
typedef float real_t;
#include <math.h>
real_t a[LEN], b[LEN], c[LEN];

void s451(void)
{
    for (int i = 0; i < LEN; i++) {
        a[i] = sinf(b[i]) + cosf(c[i]);
    }
}
