int helper(int n);
int top(int n) {
    return helper(n) + helper(n + 1);
}
