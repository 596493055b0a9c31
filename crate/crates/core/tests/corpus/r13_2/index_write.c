void f(int a[4], int i) {
    a[i] = i++;
}
