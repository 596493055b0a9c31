#define LEVEL 2
#define ON
#if LEVEL > 1 && defined(ON)
int hi = 1;
#elif LEVEL == 1
int mid = 1;
#else
int lo = 1;
#endif
#ifdef OFF
int off = 1;
#endif
#ifndef OFF
int not_off = LEVEL;
#endif
#undef LEVEL
#if defined LEVEL
int still = 1;
#endif
#if (0x10 >> 2) == 4 && !0
int shifted = 4;
#endif
int tail = LEVEL;
