#include <doctest.h>

#include <cmath>
#include <vector>

#include "dicr/simd/kernels.hpp"
#include "dicr/util/rng.hpp"

using namespace dicr;

namespace {

std::vector<double> randv(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

void close(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

}  // namespace

TEST_SUITE("invariants") {
  TEST_CASE("scalar kernels match naive loops") {
    const auto& k = simd::scalar_kernels();
    Rng rng(1);
    const auto a = randv(rng, 7), b = randv(rng, 7), c = randv(rng, 7);
    double d = 0.0, t = 0.0;
    for (int i = 0; i < 7; ++i) {
      d += a[i] * b[i];
      t += (a[i] + b[i] - c[i]) * (a[i] + b[i] - c[i]);
    }
    CHECK(k.dot(a.data(), b.data(), 7) == doctest::Approx(d));
    CHECK(k.translation_sq(a.data(), b.data(), c.data(), 7) == doctest::Approx(t));

    const auto w = randv(rng, 3 * 7);
    std::vector<double> y(3);
    k.gemv(w.data(), 3, 7, a.data(), y.data());
    for (int r = 0; r < 3; ++r) {
      double s = 0.0;
      for (int j = 0; j < 7; ++j) s += w[r * 7 + j] * a[j];
      CHECK(y[r] == doctest::Approx(s));
    }
  }

  TEST_CASE("avx2 kernels agree with the scalar reference") {
    const auto* v = simd::avx2_kernels();
    if (v == nullptr) {
      MESSAGE("avx2 variant unavailable on this machine");
      return;
    }
    const auto& s = simd::scalar_kernels();
    Rng rng(2);
    // Odd lengths exercise the tails.
    for (std::size_t n : {1u, 3u, 4u, 5u, 8u, 13u, 31u, 64u, 129u}) {
      const auto a = randv(rng, n), b = randv(rng, n), c = randv(rng, n);
      CHECK(v->dot(a.data(), b.data(), n) == doctest::Approx(s.dot(a.data(), b.data(), n)).epsilon(1e-12));
      CHECK(v->translation_sq(a.data(), b.data(), c.data(), n) ==
            doctest::Approx(s.translation_sq(a.data(), b.data(), c.data(), n)).epsilon(1e-12));

      auto y1 = c, y2 = c;
      s.axpy(0.37, a.data(), y1.data(), n);
      v->axpy(0.37, a.data(), y2.data(), n);
      close(y1, y2);

      const std::size_t rows = 1 + rng.index(9);
      const auto w = randv(rng, rows * n);
      const auto g = randv(rng, rows);
      std::vector<double> o1(rows), o2(rows);
      s.gemv(w.data(), rows, n, a.data(), o1.data());
      v->gemv(w.data(), rows, n, a.data(), o2.data());
      close(o1, o2);

      auto x1 = b, x2 = b;
      s.gemv_t_acc(w.data(), rows, n, g.data(), x1.data());
      v->gemv_t_acc(w.data(), rows, n, g.data(), x2.data());
      close(x1, x2);

      auto w1 = w, w2 = w;
      s.ger_acc(w1.data(), rows, n, g.data(), a.data());
      v->ger_acc(w2.data(), rows, n, g.data(), a.data());
      close(w1, w2);
    }
  }

  TEST_CASE("the active table is one of the available variants") {
    const auto& a = simd::active();
    CHECK(simd::isa_available(a.isa));
    CHECK(simd::isa_available(simd::Isa::kScalar));
    CHECK(&simd::kernels_for(simd::Isa::kScalar) == &simd::scalar_kernels());
    CHECK(!simd::isa_name(a.isa).empty());
  }
}
