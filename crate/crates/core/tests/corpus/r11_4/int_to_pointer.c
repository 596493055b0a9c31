void f(void) {
    int *reg = (int *)0x4000;
    *reg = 1;
}
