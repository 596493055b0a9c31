int f(int i, int j) {
    i = j++ + 1;
    return i + j;
}
