#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense double-precision kernels used by every hot loop in the library:
// embedding distances, affine layers and their gradients.  Each kernel has
// a scalar reference implementation and, where the build and the CPU allow
// it, an AVX2/FMA variant.  The variant is picked once per process.
namespace dicr::simd {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // ||h + r - t||^2
  double (*translation_sq)(const double* h, const double* r, const double* t,
                           std::size_t n);
  // y = W x, W is rows x cols row-major
  void (*gemv)(const double* w, std::size_t rows, std::size_t cols,
               const double* x, double* y);
  // x_grad += W^T g
  void (*gemv_t_acc)(const double* w, std::size_t rows, std::size_t cols,
                     const double* g, double* x_grad);
  // w_grad += g x^T
  void (*ger_acc)(double* w_grad, std::size_t rows, std::size_t cols,
                  const double* g, const double* x);
};

const KernelTable& scalar_kernels();
// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels();

bool isa_available(Isa isa);
const KernelTable& kernels_for(Isa isa);

// Process-wide selection.  DICR_SIMD=scalar forces the reference path.
const KernelTable& active();
std::string_view isa_name(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double translation_sq(std::span<const double> h, std::span<const double> r,
                             std::span<const double> t) {
  return active().translation_sq(h.data(), r.data(), t.data(), h.size());
}

inline void gemv(std::span<const double> w, std::size_t rows, std::size_t cols,
                 std::span<const double> x, std::span<double> y) {
  active().gemv(w.data(), rows, cols, x.data(), y.data());
}

inline void gemv_t_acc(std::span<const double> w, std::size_t rows, std::size_t cols,
                       std::span<const double> g, std::span<double> x_grad) {
  active().gemv_t_acc(w.data(), rows, cols, g.data(), x_grad.data());
}

inline void ger_acc(std::span<double> w_grad, std::size_t rows, std::size_t cols,
                    std::span<const double> g, std::span<const double> x) {
  active().ger_acc(w_grad.data(), rows, cols, g.data(), x.data());
}

}  // namespace dicr::simd
