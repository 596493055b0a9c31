int f(void) {
    static int count;
    count++;
    return count;
}
