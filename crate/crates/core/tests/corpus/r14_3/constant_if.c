int f(int x) {
    if (1) {
        x = x + 1;
    }
    return x;
}
