char *f(long a) {
    return (char *)a;
}
