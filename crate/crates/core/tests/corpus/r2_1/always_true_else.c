int f(int x) {
    int y;
    if (x * 0 == 0) {
        y = 1;
    } else {
        y = 2;
    }
    return y;
}
