#include <stddef.h>
int *f(void) {
    int *p = NULL;
    int *q = 0;
    return (p != NULL) ? p : q;
}
