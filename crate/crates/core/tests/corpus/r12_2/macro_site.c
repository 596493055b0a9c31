#include <stdint.h>
#define SHL(x, n) ((x) << (n))
uint32_t f(uint32_t v) {
    return SHL(v, 40);
}
