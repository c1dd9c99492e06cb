#include "dicr/simd/kernels.hpp"

namespace dicr::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double translation_sq_scalar(const double* h, const double* r, const double* t,
                             std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = h[i] + r[i] - t[i];
    s += d * d;
  }
  return s;
}

void gemv_scalar(const double* w, std::size_t rows, std::size_t cols,
                 const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = dot_scalar(w + i * cols, x, cols);
}

void gemv_t_acc_scalar(const double* w, std::size_t rows, std::size_t cols,
                       const double* g, double* x_grad) {
  for (std::size_t i = 0; i < rows; ++i) {
    if (g[i] != 0.0) axpy_scalar(g[i], w + i * cols, x_grad, cols);
  }
}

void ger_acc_scalar(double* w_grad, std::size_t rows, std::size_t cols,
                    const double* g, const double* x) {
  for (std::size_t i = 0; i < rows; ++i) {
    if (g[i] != 0.0) axpy_scalar(g[i], x, w_grad + i * cols, cols);
  }
}

constexpr KernelTable kScalarTable{
    Isa::kScalar,      dot_scalar,       axpy_scalar,   translation_sq_scalar,
    gemv_scalar,       gemv_t_acc_scalar, ger_acc_scalar,
};

}  // namespace

const KernelTable& scalar_kernels() { return kScalarTable; }

}  // namespace dicr::simd
