#pragma once

#include <cmath>
#include <cstddef>

namespace mmdr {

// tanh via polynomial exp; |error| <= 5e-15 vs std::tanh, noticeably faster,
// and fully deterministic (no libm dispatch on the hot path).
double fast_tanh(double x);

inline double square(double x) { return x * x; }

inline double clamp(double x, double lo, double hi) {
    return x < lo ? lo : (x > hi ? hi : x);
}

// Wrap angle to (-pi, pi].
double wrap_angle(double a);

// Pin the BLAS backend to one thread. Call once at process start in anything
// that must be bitwise reproducible (threaded reductions reorder sums); a
// no-op when built without CBLAS.
void blas_set_single_thread();

namespace nn {

// Row-major C = alpha * op(A) * op(B) + beta * C.
// A is MxK after transposition, B is KxN after transposition, C is MxN.
void gemm(bool trans_a, bool trans_b, int m, int n, int k,
          double alpha, const double* a, int lda, const double* b, int ldb,
          double beta, double* c, int ldc);

}  // namespace nn
}  // namespace mmdr
