#ifndef LEN2
#define LEN2 256
#endif
typedef float real_t;
real_t aa[LEN2][LEN2], bb[LEN2][LEN2];

void s231(void)
{
    for (int i = 0; i < LEN2; i++) {
        for (int j = 1; j < LEN2; j++) {
            aa[j][i] = aa[j-1][i] + bb[j][i];
        }
    }
}
