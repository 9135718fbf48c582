#include <stdio.h>
#include <stdlib.h>

#define N 256
#define STEPS 900

static double a[N][N], b[N][N], c[N][N];

static inline double blend(double x, double y, int k) {
  return (k & 1) ? 0.5 * (x + y) : x * 0.75 + y * 0.25;
}

static void init(unsigned seed) {
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      seed = seed * 1103515245u + 12345u;
      a[i][j] = (double)(seed >> 16 & 0x7fff) / 32768.0;
      b[i][j] = (double)((i * 31 + j * 17) % 97) / 97.0;
    }
}

static void stencil(int k) {
  for (int i = 1; i < N - 1; ++i)
    for (int j = 1; j < N - 1; ++j)
      c[i][j] = blend(a[i - 1][j] + a[i + 1][j], a[i][j - 1] + a[i][j + 1], k) * 0.5 + b[i][j] * 0.01;
  for (int i = 1; i < N - 1; ++i)
    for (int j = 1; j < N - 1; ++j) a[i][j] = c[i][j];
}

static double reduce(void) {
  double s = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) s += a[i][j] * b[j][i];
  return s;
}

int main(void) {
  init(42u);
  double acc = 0.0;
  for (int k = 0; k < STEPS; ++k) {
    stencil(k);
    if (k % 6 == 5) acc += reduce();
  }
  printf("%.6f\n", acc);
  return 0;
}
