void f(void) {
    char *s = "abc";
    s[1]++;
}
