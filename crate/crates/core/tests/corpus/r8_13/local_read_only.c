int f(int a[4]) {
    int *p;
    int s;
    p = &a[0];
    s = p[0] + p[1];
    a[2] = s;
    return s;
}
