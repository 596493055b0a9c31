int g(void);
void f(void) {
    (void)g();
}
