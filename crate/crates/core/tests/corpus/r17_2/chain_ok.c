int c(int x) { return x + 1; }
int b(int x) { return c(x) * 2; }
int a(int x) { return b(x) - c(x); }
