int f(int n) {
    int r = 0;
    int t;
    while (n > 0) {
        r = r + n;
        n = n - 1;
    }
    t = r;
    return r;
}
