int f(void) {
    int x = 4;
    return x;
}
