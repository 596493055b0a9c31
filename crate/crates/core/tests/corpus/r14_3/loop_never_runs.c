int f(void) {
    int s = 0;
    while (0) {
        s++;
    }
    return s;
}
