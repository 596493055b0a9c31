void g(void);
void f(void) {
    while (1) {
        g();
    }
}
