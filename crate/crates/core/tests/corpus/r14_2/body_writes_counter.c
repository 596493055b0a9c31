int f(int n) {
    int i;
    int s = 0;
    for (i = 0; i < n; ++i) {
        i++;
        s += i;
    }
    return s;
}
