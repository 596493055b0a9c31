float f(void) {
    float s = 0.0f;
    int i;
    for (i = 0; i < 10; i++) {
        s += 0.1f;
    }
    return s;
}
