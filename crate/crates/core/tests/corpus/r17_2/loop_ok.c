unsigned fact(unsigned n) {
    unsigned r = 1U;
    while (n > 1U) {
        r = r * n;
        n--;
    }
    return r;
}
