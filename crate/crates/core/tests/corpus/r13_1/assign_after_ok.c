int g(void);
int f(void) {
    int x;
    x = g();
    return x;
}
