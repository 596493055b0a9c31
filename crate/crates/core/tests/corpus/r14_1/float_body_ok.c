float f(const float *a, int n) {
    float s = 0.0f;
    for (int i = 0; i < n; ++i) {
        s = s + a[i];
    }
    return s;
}
