// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "dicr/simd/kernels.hpp"

namespace dicr::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double translation_sq_avx2(const double* h, const double* r, const double* t,
                           std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(
        _mm256_add_pd(_mm256_loadu_pd(h + i), _mm256_loadu_pd(r + i)),
        _mm256_loadu_pd(t + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = h[i] + r[i] - t[i];
    s += d * d;
  }
  return s;
}

void gemv_avx2(const double* w, std::size_t rows, std::size_t cols,
               const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = dot_avx2(w + i * cols, x, cols);
}

void gemv_t_acc_avx2(const double* w, std::size_t rows, std::size_t cols,
                     const double* g, double* x_grad) {
  for (std::size_t i = 0; i < rows; ++i) {
    if (g[i] != 0.0) axpy_avx2(g[i], w + i * cols, x_grad, cols);
  }
}

void ger_acc_avx2(double* w_grad, std::size_t rows, std::size_t cols,
                  const double* g, const double* x) {
  for (std::size_t i = 0; i < rows; ++i) {
    if (g[i] != 0.0) axpy_avx2(g[i], x, w_grad + i * cols, cols);
  }
}

constexpr KernelTable kAvx2Table{
    Isa::kAvx2,      dot_avx2,        axpy_avx2,   translation_sq_avx2,
    gemv_avx2,       gemv_t_acc_avx2, ger_acc_avx2,
};

}  // namespace

const KernelTable* avx2_compiled_kernels() { return &kAvx2Table; }

}  // namespace dicr::simd
