double f(void) {
    double d;
    double s = 0.0;
    for (d = 0.0; d < 2.0; d = d + 0.5) {
        s = s + d;
    }
    return s;
}
