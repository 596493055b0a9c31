#define SQ(x) ((x) * (x))
#define MAX(a, b) ((a) > (b) ? (a) : (b))
#define CALL(f, arg) f(arg)
int a = SQ(3 + 1);
int b = MAX(SQ(2), (1, 5));
int c = CALL(SQ, 7);
int d = MAX( , 1);
