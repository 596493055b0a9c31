int f(int c) {
    int x;
    if (c > 0) {
        x = 1;
    } else {
        x = 2;
    }
    return x;
}
