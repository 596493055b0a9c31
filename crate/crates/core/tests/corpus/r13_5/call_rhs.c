int g(void);
int f(int a) {
    if (a && g()) {
        return 1;
    }
    return 0;
}
