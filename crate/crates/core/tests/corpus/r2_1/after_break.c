int f(int n) {
    int s = 0;
    while (n > 0) {
        s = s + n;
        break;
        n = n - 1;
    }
    return s;
}
