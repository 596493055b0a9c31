int *f(int *p) {
    return (int *)(void *)p;
}
