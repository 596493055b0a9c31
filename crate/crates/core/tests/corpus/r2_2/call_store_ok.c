int g(void);
void f(void) {
    int x;
    x = g();
}
