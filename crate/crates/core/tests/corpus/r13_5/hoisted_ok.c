int g(void);
int f(int a) {
    int t = 0;
    if (a != 0) {
        t = g();
    }
    return (a != 0) && (t != 0);
}
