#include "mmdr/common/math.hpp"

#include <cstdint>

#ifdef MMDR_USE_CBLAS
#include <cblas.h>
#endif

namespace mmdr {
namespace {

// exp(x) with ~1ulp accuracy: split x = k*ln2 + t with |t| <= ln2/2,
// evaluate a degree-11 Taylor polynomial on t, then assemble 2^k through the
// exponent bits directly.
double fast_exp(double x) {
    constexpr double kLn2 = 0.6931471805599453;
    constexpr double kInvLn2 = 1.4426950408889634;
    const double kd = std::nearbyint(x * kInvLn2);
    const long long ki = static_cast<long long>(kd);
    const double t = x - kd * kLn2;

    // Horner on the Taylor series of exp(t); |t| <= 0.347 keeps the tail
    // below 1e-17.
    double p = 1.0 / 39916800.0;  // 1/11!
    p = p * t + 1.0 / 3628800.0;
    p = p * t + 1.0 / 362880.0;
    p = p * t + 1.0 / 40320.0;
    p = p * t + 1.0 / 5040.0;
    p = p * t + 1.0 / 720.0;
    p = p * t + 1.0 / 120.0;
    p = p * t + 1.0 / 24.0;
    p = p * t + 1.0 / 6.0;
    p = p * t + 0.5;
    p = p * t + 1.0;
    p = p * t + 1.0;

    union {
        double d;
        long long i;
    } u;
    u.i = (ki + 1023LL) << 52;
    return p * u.d;
}

}  // namespace

double fast_tanh(double x) {
    const double ax = x < 0.0 ? -x : x;
    if (ax > 20.0) return x < 0.0 ? -1.0 : 1.0;
    const double e = fast_exp(2.0 * ax);
    const double t = 1.0 - 2.0 / (e + 1.0);
    return x < 0.0 ? -t : t;
}

double wrap_angle(double a) {
    constexpr double kPi = 3.14159265358979323846;
    constexpr double kTwoPi = 2.0 * kPi;
    a = std::fmod(a, kTwoPi);
    if (a <= -kPi) a += kTwoPi;
    if (a > kPi) a -= kTwoPi;
    return a;
}

void blas_set_single_thread() {
#ifdef MMDR_USE_CBLAS
    openblas_set_num_threads(1);
#endif
}

namespace nn {

void gemm(bool trans_a, bool trans_b, int m, int n, int k,
          double alpha, const double* a, int lda, const double* b, int ldb,
          double beta, double* c, int ldc) {
#ifdef MMDR_USE_CBLAS
    cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b,
                ldb, beta, c, ldc);
#else
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) {
                const double av = trans_a ? a[p * lda + i] : a[i * lda + p];
                const double bv = trans_b ? b[j * ldb + p] : b[p * ldb + j];
                acc += av * bv;
            }
            c[i * ldc + j] = alpha * acc + beta * c[i * ldc + j];
        }
    }
#endif
}

}  // namespace nn
}  // namespace mmdr
