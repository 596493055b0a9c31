int f(void) {
    int x;
    x = 1;
    x = 2;
    return x;
}
