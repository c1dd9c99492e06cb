#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "dicr/ad/adam.hpp"
#include "dicr/ad/ops.hpp"
#include "dicr/error.hpp"
#include "dicr/util/rng.hpp"
#include "support/grad_check.hpp"

using namespace dicr;
using namespace dicr::ad;

namespace {

constexpr double kTol = 1e-4;

bool all(const std::string&) { return true; }

// Projects v onto a fixed pseudo-random direction so every output entry
// contributes a distinct weight to the scalar loss.
Var project(Var v) {
  std::vector<double> w(v.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.3 + 0.17 * static_cast<double>((i * 7) % 11);
  return dot(v, v.tape->constant(w, v.rows(), v.cols()));
}

void expect_grad(ParameterStore& store, const std::function<Var(Tape&)>& loss) {
  const auto r = testing::grad_check(store, loss, all, 1e-5);
  INFO(r.worst);
  CHECK(r.checked > 0);
  CHECK(r.max_rel_error < kTol);
}

}  // namespace

TEST_CASE("tape values for basic arithmetic") {
  Tape t;
  auto a = t.constant({1, 2, 3});
  auto b = t.constant({4, 5, 6});
  CHECK(dot(a, b).item() == 32.0);
  CHECK(sum(mul(a, b)).item() == 32.0);
  CHECK(mean(a).item() == 2.0);
  const auto s = softmax(a).value();
  CHECK(s[0] + s[1] + s[2] == doctest::Approx(1.0));
  const auto ls = log_softmax(a).value();
  for (int i = 0; i < 3; ++i) CHECK(std::exp(ls[i]) == doctest::Approx(s[i]));
  CHECK_THROWS_AS(add(a, t.constant({1, 2})), ConfigError);
}

TEST_CASE("clamp and detach block gradients") {
  ParameterStore st;
  auto& p = st.add("p", 3, 1);
  p.value()[0] = -2.0;
  p.value()[1] = 0.5;
  p.value()[2] = 2.0;
  Tape t;
  auto x = t.param(p);
  auto l = add(sum(clamp(x, -1.0, 1.0)), sum(mul(detach(x), x)));
  t.backward(l);
  // d/dx clamp = [0, 1, 0]; d/dx (stop(x) * x) = stop(x).
  CHECK(p.grad()[0] == doctest::Approx(-2.0));
  CHECK(p.grad()[1] == doctest::Approx(1.5));
  CHECK(p.grad()[2] == doctest::Approx(2.0));
}

TEST_CASE("adam moves parameters against the gradient and clears it") {
  ParameterStore st;
  auto& p = st.add("p", 2, 1);
  p.value()[0] = 1.0;
  p.value()[1] = -1.0;
  Adam opt(st, {.learning_rate = 0.1});
  for (int i = 0; i < 50; ++i) {
    Tape t;
    auto x = t.param(p);
    t.backward(sum(mul(x, x)));
    opt.step();
  }
  CHECK(std::abs(p.value()[0]) < 0.5);
  CHECK(std::abs(p.value()[1]) < 0.5);
  CHECK(p.grad()[0] == 0.0);
  CHECK(opt.steps() == 50);
}

TEST_CASE("gradient clipping bounds the global norm") {
  ParameterStore st;
  auto& p = st.add("p", 2, 1);
  p.grad()[0] = 3.0;
  p.grad()[1] = 4.0;
  st.clip_grad_norm(1.0);
  CHECK(st.grad_norm() == doctest::Approx(1.0));
}

TEST_CASE("parameter store round-trips through a stream") {
  Rng rng(4);
  ParameterStore a, b;
  a.add("w", 3, 2).init_uniform(rng);
  a.add("v", 1, 4).init_uniform(rng);
  b.add("w", 3, 2);
  b.add("v", 1, 4);
  std::stringstream ss;
  a.write(ss);
  b.read(ss);
  CHECK(a.same_values(b));
  ParameterStore c;
  c.add("w", 2, 3);
  std::stringstream s2;
  a.write(s2);
  CHECK_THROWS(c.read(s2));
}

TEST_SUITE("gradients") {
  TEST_CASE("elementwise and reduction ops") {
    Rng rng(10);
    ParameterStore st;
    auto& a = st.add("a", 5, 1);
    auto& b = st.add("b", 5, 1);
    a.init_uniform(rng, 1.0);
    b.init_uniform(rng, 1.0);
    for (auto& v : b.value()) v = std::abs(v) + 0.2;  // positive for log
    expect_grad(st, [&](Tape& t) {
      auto x = t.param(a), y = t.param(b);
      std::vector<Var> terms = {project(add(x, y)),       project(sub(x, y)),        project(mul(x, y)),
                                project(scale(x, 0.7)),   project(one_minus(y)),     project(tanh(x)),
                                project(sigmoid(x)),      project(elu(x)),           project(exp(x)),
                                project(log(y)),          project(log_floor(y, 0.05)), project(softmax(x)),
                                project(log_softmax(x)),  mean(mul(x, x)),           dot(x, y),
                                project(mul_scalar(pick(x, 2), y))};
      return add_all(terms);
    });
  }

  TEST_CASE("matrix ops") {
    Rng rng(11);
    ParameterStore st;
    auto& w = st.add("w", 3, 4);
    auto& m = st.add("m", 2, 4);
    auto& x = st.add("x", 4, 1);
    auto& q = st.add("q", 3, 1);
    for (auto* p : {&w, &m, &x, &q}) p->init_uniform(rng, 1.0);
    expect_grad(st, [&](Tape& t) {
      auto W = t.param(w), M = t.param(m), X = t.param(x), Q = t.param(q);
      const int rows[] = {2, 0, 2};
      std::vector<Var> parts = {slice(X, 1, 2), Q};
      std::vector<Var> stacked = {X, t.row(m, 1)};
      std::vector<Var> terms = {
          project(matvec(W, X)),
          project(matmul_rows(M, W)),
          project(rows_dot(W, X)),
          project(weighted_rows(W, Q)),
          project(gather_dot(W, rows, X)),
          project(concat(parts)),
          project(stack(stacked)),
          project(row_of(M, 0)),
          project(pad_or_truncate(Q, 5)),
          project(pad_or_truncate(X, 2)),
          project(scatter_add(Q, std::vector<int>{1, 1, 0}, 2)),
      };
      return add_all(terms);
    });
  }

  TEST_CASE("attention scores and gru cell") {
    Rng rng(12);
    ParameterStore st;
    auto& keys = st.add("keys", 3, 4);
    auto& query = st.add("query", 4, 1);
    auto& v = st.add("v", 4, 1);
    auto& x = st.add("x", 3, 1);
    auto& h = st.add("h", 2, 1);
    auto& wx = st.add("wx", 6, 3);
    auto& wh = st.add("wh", 6, 2);
    auto& bx = st.add("bx", 6, 1);
    auto& bh = st.add("bh", 6, 1);
    for (std::size_t i = 0; i < st.size(); ++i) st.at(i).init_uniform(rng, 1.0);
    expect_grad(st, [&](Tape& t) {
      auto s = additive_scores(t.param(keys), t.param(query), t.param(v));
      auto h1 = gru_cell(t.param(x), t.param(h), t.param(wx), t.param(wh), t.param(bx), t.param(bh));
      auto h2 = gru_cell(t.param(x), h1, t.param(wx), t.param(wh), t.param(bx), t.param(bh));
      return add(project(softmax(s)), project(h2));
    });
  }
}
