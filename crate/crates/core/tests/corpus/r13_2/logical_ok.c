int f(int i) {
    return (i++ > 0) && (i > 2);
}
