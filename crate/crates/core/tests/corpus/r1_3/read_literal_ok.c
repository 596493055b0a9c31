char first(void) {
    const char *p = "String";
    return p[0];
}
