#ifndef LEN
#define LEN 32000
#endif
typedef float real_t;
real_t a[LEN], b[LEN], c[LEN];
int ip[LEN];

void s4113(void)
{
    for (int i = 0; i < LEN; i++) {
        a[ip[i]] = b[ip[i]] + c[i];
    }
}
