#include "dicr/ad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dicr/error.hpp"
#include "dicr/simd/kernels.hpp"

namespace dicr::ad {
namespace {

Tape& tape_of(Var a) { return *a.tape; }

std::vector<double> copy(std::span<const double> s) { return {s.begin(), s.end()}; }

void require_same_size(Var a, Var b, const char* op) {
  if (a.size() != b.size()) {
    throw ConfigError(std::string(op) + ": size mismatch " + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()));
  }
}

bool any_grad(std::initializer_list<Var> vars) {
  for (Var v : vars) {
    if (v.tape->requires_grad(v)) return true;
  }
  return false;
}

template <class F>
Var unary(Var a, std::vector<double> out, F local_grad) {
  Tape& t = tape_of(a);
  const int rows = a.rows();
  const int cols = a.cols();
  const bool rg = t.requires_grad(a);
  Var result;
  result = t.push(std::move(out), rows, cols, rg, [a, local_grad, id = static_cast<int>(t.size())](Tape& tp) {
    const Var self{&tp, id};
    auto g = tp.grad(self);
    auto ga = tp.grad(a);
    const auto va = tp.value(a);
    const auto vo = tp.value(self);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * local_grad(va[i], vo[i]);
  });
  return result;
}

}  // namespace

Var add(Var a, Var b) {
  require_same_size(a, b, "add");
  Tape& t = tape_of(a);
  std::vector<double> out = copy(a.value());
  const auto vb = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += vb[i];
  const int id = static_cast<int>(t.size());
  return t.push(std::move(out), a.rows(), a.cols(), any_grad({a, b}), [a, b, id](Tape& tp) {
    const auto g = tp.grad(Var{&tp, id});
    if (auto ga = tp.grad(a); !ga.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (auto gb = tp.grad(b); !gb.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
    }
  });
}

Var sub(Var a, Var b) {
  require_same_size(a, b, "sub");
  Tape& t = tape_of(a);
  std::vector<double> out = copy(a.value());
  const auto vb = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= vb[i];
  const int id = static_cast<int>(t.size());
  return t.push(std::move(out), a.rows(), a.cols(), any_grad({a, b}), [a, b, id](Tape& tp) {
    const auto g = tp.grad(Var{&tp, id});
    if (auto ga = tp.grad(a); !ga.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (auto gb = tp.grad(b); !gb.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_size(a, b, "mul");
  Tape& t = tape_of(a);
  std::vector<double> out = copy(a.value());
  const auto vb = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= vb[i];
  const int id = static_cast<int>(t.size());
  return t.push(std::move(out), a.rows(), a.cols(), any_grad({a, b}), [a, b, id](Tape& tp) {
    const auto g = tp.grad(Var{&tp, id});
    const auto va = tp.value(a);
    const auto vb = tp.value(b);
    if (auto ga = tp.grad(a); !ga.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[i];
    }
    if (auto gb = tp.grad(b); !gb.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va[i];
    }
  });
}

Var scale(Var a, double c) {
  std::vector<double> out = copy(a.value());
  for (double& v : out) v *= c;
  return unary(a, std::move(out), [c](double, double) { return c; });
}

Var neg(Var a) { return scale(a, -1.0); }

Var one_minus(Var a) {
  std::vector<double> out = copy(a.value());
  for (double& v : out) v = 1.0 - v;
  return unary(a, std::move(out), [](double, double) { return -1.0; });
}

Var mul_scalar(Var s, Var v) {
  if (s.size() != 1) throw ConfigError("mul_scalar: first operand must be 1 x 1");
  Tape& t = tape_of(v);
  const double sv = s.item();
  std::vector<double> out = copy(v.value());
  for (double& x : out) x *= sv;
  const int id = static_cast<int>(t.size());
  return t.push(std::move(out), v.rows(), v.cols(), any_grad({s, v}), [s, v, id](Tape& tp) {
    const auto g = tp.grad(Var{&tp, id});
    if (auto gs = tp.grad(s); !gs.empty()) gs[0] += simd::dot(g, tp.value(v));
    if (auto gv = tp.grad(v); !gv.empty()) simd::axpy(tp.value(s)[0], g, gv);
  });
}

Var add_all(std::span<const Var> terms) {
  if (terms.empty()) throw ConfigError("add_all: no terms");
  Tape& t = tape_of(terms[0]);
  std::vector<double> out = copy(terms[0].value());
  bool rg = false;
  for (const Var& term : terms) {
    require_same_size(term, terms[0], "add_all");
    rg = rg || t.requires_grad(term);
  }
  for (std::size_t k = 1; k < terms.size(); ++k) {
    const auto v = terms[k].value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
  }
  const int id = static_cast<int>(t.size());
  std::vector<Var> inputs(terms.begin(), terms.end());
  return t.push(std::move(out), terms[0].rows(), terms[0].cols(), rg, [inputs, id](Tape& tp) {
    const auto g = tp.grad(Var{&tp, id});
    for (const Var& in : inputs) {
      if (auto gi = tp.grad(in); !gi.empty()) {
        for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
      }
    }
  });
}

Var tanh(Var a) {
  std::vector<double> out = copy(a.value());
  for (double& v : out) v = std::tanh(v);
  return unary(a, std::move(out), [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  std::vector<double> out = copy(a.value());
  for (double& v : out) v = 1.0 / (1.0 + std::exp(-v));
  return unary(a, std::move(out), [](double, double y) { return y * (1.0 - y); });
}

Var elu(Var a) {
  std::vector<double> out = copy(a.value());
  for (double& v : out) v = v > 0.0 ? v : std::expm1(v);
  return unary(a, std::move(out), [](double x, double y) { return x > 0.0 ? 1.0 : y + 1.0; });
}

Var exp(Var a) {
  std::vector<double> out = copy(a.value());
  for (double& v : out) v = std::exp(v);
  return unary(a, std::move(out), [](double, double y) { return y; });
}

Var log(Var a) {
  std::vector<double> out = copy(a.value());
  for (double& v : out) v = std::log(v);
  return unary(a, std::move(out), [](double x, double) { return 1.0 / x; });
}

Var log_floor(Var a, double floor) {
  std::vector<double> out = copy(a.value());
  for (double& v : out) v = std::log(std::max(v, floor));
  return unary(a, std::move(out), [floor](double x, double) { return x > floor ? 1.0 / x : 0.0; });
}

Var clamp(Var a, double lo, double hi) {
  std::vector<double> out = copy(a.value());
  for (double& v : out) v = std::clamp(v, lo, hi);
  return unary(a, std::move(out),
               [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var matvec(Var w, Var x) {
  const int r = w.rows();
  const int c = w.cols();
  if (static_cast<int>(x.size()) != c) {
    throw ConfigError("matvec: " + std::to_string(r) + "x" + std::to_string(c) +
                      " matrix times vector of length " + std::to_string(x.size()));
  }
  Tape& t = tape_of(w);
  std::vector<double> out(static_cast<std::size_t>(r));
  simd::gemv(w.value(), r, c, x.value(), out);
  const int id = static_cast<int>(t.size());
  return t.push(std::move(out), r, 1, any_grad({w, x}), [w, x, r, c, id](Tape& tp) {
    const auto g = tp.grad(Var{&tp, id});
    if (auto gw = tp.grad(w); !gw.empty()) simd::ger_acc(gw, r, c, g, tp.value(x));
    if (auto gx = tp.grad(x); !gx.empty()) simd::gemv_t_acc(tp.value(w), r, c, g, gx);
  });
}

Var matmul_rows(Var m, Var w) {
  const int n = m.rows();
  const int c = m.cols();
  const int r = w.rows();
  if (w.cols() != c) throw ConfigError("matmul_rows: inner dimensions differ");
  Tape& t = tape_of(m);
  std::vector<double> out(static_cast<std::size_t>(n) * r);
  const auto vm = m.value();
  const auto vw = w.value();
  for (int j = 0; j < n; ++j) {
    simd::gemv(vw, r, c, vm.subspan(static_cast<std::size_t>(j) * c, c),
               std::span<double>(out).subspan(static_cast<std::size_t>(j) * r, r));
  }
  const int id = static_cast<int>(t.size());
  return t.push(std::move(out), n, r, any_grad({m, w}), [m, w, n, c, r, id](Tape& tp) {
    const auto g = tp.grad(Var{&tp, id});
    const auto vm = tp.value(m);
    const auto vw = tp.value(w);
    auto gm = tp.grad(m);
    auto gw = tp.grad(w);
    for (int j = 0; j < n; ++j) {
      const auto gj = g.subspan(static_cast<std::size_t>(j) * r, r);
      if (!gw.empty()) simd::ger_acc(gw, r, c, gj, vm.subspan(static_cast<std::size_t>(j) * c, c));
      if (!gm.empty()) simd::gemv_t_acc(vw, r, c, gj, gm.subspan(static_cast<std::size_t>(j) * c, c));
    }
  });
}

Var rows_dot(Var m, Var q) {
  const int n = m.rows();
  const int c = m.cols();
  if (static_cast<int>(q.size()) != c) throw ConfigError("rows_dot: width mismatch");
  Tape& t = tape_of(m);
  std::vector<double> out(static_cast<std::size_t>(n));
  simd::gemv(m.value(), n, c, q.value(), out);
  const int id = static_cast<int>(t.size());
  return t.push(std::move(out), n, 1, any_grad({m, q}), [m, q, n, c, id](Tape& tp) {
    const auto g = tp.grad(Var{&tp, id});
    if (auto gm = tp.grad(m); !gm.empty()) simd::ger_acc(gm, n, c, g, tp.value(q));
    if (auto gq = tp.grad(q); !gq.empty()) simd::gemv_t_acc(tp.value(m), n, c, g, gq);
  });
}

Var weighted_rows(Var m, Var weights) {
  const int n = m.rows();
  const int c = m.cols();
  if (static_cast<int>(weights.size()) != n) throw ConfigError("weighted_rows: weight count mismatch");
  Tape& t = tape_of(m);
  std::vector<double> out(static_cast<std::size_t>(c), 0.0);
  simd::gemv_t_acc(m.value(), n, c, weights.value(), out);
  const int id = static_cast<int>(t.size());
  return t.push(std::move(out), c, 1, any_grad({m, weights}), [m, weights, n, c, id](Tape& tp) {
    const auto g = tp.grad(Var{&tp, id});
    if (auto gm = tp.grad(m); !gm.empty()) simd::ger_acc(gm, n, c, tp.value(weights), g);
    if (auto gw = tp.grad(weights); !gw.empty()) {
      std::vector<double> tmp(static_cast<std::size_t>(n));
      simd::gemv(tp.value(m), n, c, g, tmp);
      for (int j = 0; j < n; ++j) gw[static_cast<std::size_t>(j)] += tmp[static_cast<std::size_t>(j)];
    }
  });
}

Var dot(Var a, Var b) {
  require_same_size(a, b, "dot");
  Tape& t = tape_of(a);
  std::vector<double> out{simd::dot(a.value(), b.value())};
  const int id = static_cast<int>(t.size());
  return t.push(std::move(out), 1, 1, any_grad({a, b}), [a, b, id](Tape& tp) {
    const double g = tp.grad(Var{&tp, id})[0];
    if (auto ga = tp.grad(a); !ga.empty()) simd::axpy(g, tp.value(b), ga);
    if (auto gb = tp.grad(b); !gb.empty()) simd::axpy(g, tp.value(a), gb);
  });
}

Var gather_dot(Var m, std::span<const int> rows, Var q) {
  const int c = m.cols();
  if (static_cast<int>(q.size()) != c) throw ConfigError("gather_dot: width mismatch");
  std::vector<int> idx(rows.begin(), rows.end());
  for (int r : idx) {
    if (r < 0 || r >= m.rows()) throw LookupError("gather_dot: row " + std::to_string(r) + " out of range");
  }
  Tape& t = tape_of(m);
  const auto vm = m.value();
  std::vector<double> out(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    out[j] = simd::dot(vm.subspan(static_cast<std::size_t>(idx[j]) * c, c), q.value());
  }
  const int id = static_cast<int>(t.size());
  const int n = static_cast<int>(idx.size());
  return t.push(std::move(out), n, 1, any_grad({m, q}), [m, q, c, idx = std::move(idx), id](Tape& tp) {
    const auto g = tp.grad(Var{&tp, id});
    auto gm = tp.grad(m);
    auto gq = tp.grad(q);
    const auto vm = tp.value(m);
    const auto vq = tp.value(q);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const auto off = static_cast<std::size_t>(idx[j]) * c;
      if (!gm.empty()) simd::axpy(g[j], vq, gm.subspan(off, c));
      if (!gq.empty()) simd::axpy(g[j], vm.subspan(off, c), gq);
    }
  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double v : a.value()) s += v;
  const int id = static_cast<int>(t.size());
  return t.push({s}, 1, 1, t.requires_grad(a), [a, id](Tape& tp) {
    const double g = tp.grad(Var{&tp, id})[0];
    for (double& x : tp.grad(a)) x += g;
  });
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.size())); }

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ConfigError("concat: no parts");
  Tape& t = tape_of(parts[0]);
  std::vector<double> out;
  bool rg = false;
  for (const Var& p : parts) {
    const auto v = p.value();
    out.insert(out.end(), v.begin(), v.end());
    rg = rg || t.requires_grad(p);
  }
  const int n = static_cast<int>(out.size());
  const int id = static_cast<int>(t.size());
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.push(std::move(out), n, 1, rg, [inputs, id](Tape& tp) {
    const auto g = tp.grad(Var{&tp, id});
    std::size_t off = 0;
    for (const Var& in : inputs) {
      const std::size_t len = tp.value(in).size();
      if (auto gi = tp.grad(in); !gi.empty()) {
        for (std::size_t i = 0; i < len; ++i) gi[i] += g[off + i];
      }
      off += len;
    }
  });
}

Var stack(std::span<const Var> rows) {
  if (rows.empty()) throw ConfigError("stack: no rows");
  Var flat = concat(rows);
  Tape& t = tape_of(flat);
  const int n = static_cast<int>(rows.size());
  const int c = static_cast<int>(rows[0].size());
  for (const Var& r : rows) {
    if (static_cast<int>(r.size()) != c) throw ConfigError("stack: ragged rows");
  }
  // Reshape of the concatenation; same storage order.
  const int id = static_cast<int>(t.size());
  return t.push(copy(flat.value()), n, c, t.requires_grad(flat), [flat, id](Tape& tp) {
    const auto g = tp.grad(Var{&tp, id});
    auto gf = tp.grad(flat);
    for (std::size_t i = 0; i < g.size(); ++i) gf[i] += g[i];
  });
}

Var slice(Var a, int offset, int length) {
  if (offset < 0 || length < 0 || static_cast<std::size_t>(offset + length) > a.size()) {
    throw ConfigError("slice out of range");
  }
  Tape& t = tape_of(a);
  const auto va = a.value();
  std::vector<double> out(va.begin() + offset, va.begin() + offset + length);
  const int id = static_cast<int>(t.size());
  return t.push(std::move(out), length, 1, t.requires_grad(a), [a, offset, id](Tape& tp) {
    const auto g = tp.grad(Var{&tp, id});
    auto ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[static_cast<std::size_t>(offset) + i] += g[i];
  });
}

Var row_of(Var m, int r) {
  if (r < 0 || r >= m.rows()) throw ConfigError("row_of: row out of range");
  return slice(m, r * m.cols(), m.cols());
}

Var pick(Var a, int index) { return slice(a, index, 1); }

Var pad_or_truncate(Var a, int length) {
  Tape& t = tape_of(a);
  const auto va = a.value();
  const int keep = std::min<int>(length, static_cast<int>(va.size()));
  std::vector<double> out(static_cast<std::size_t>(length), 0.0);
  std::copy(va.begin(), va.begin() + keep, out.begin());
  const int id = static_cast<int>(t.size());
  return t.push(std::move(out), length, 1, t.requires_grad(a), [a, keep, id](Tape& tp) {
    const auto g = tp.grad(Var{&tp, id});
    auto ga = tp.grad(a);
    for (int i = 0; i < keep; ++i) ga[static_cast<std::size_t>(i)] += g[static_cast<std::size_t>(i)];
  });
}

Var scatter_add(Var a, std::span<const int> index, int size) {
  if (index.size() != a.size()) throw ConfigError("scatter_add: index count mismatch");
  Tape& t = tape_of(a);
  std::vector<double> out(static_cast<std::size_t>(size), 0.0);
  const auto va = a.value();
  for (std::size_t j = 0; j < index.size(); ++j) {
    if (index[j] < 0 || index[j] >= size) throw ConfigError("scatter_add: index out of range");
    out[static_cast<std::size_t>(index[j])] += va[j];
  }
  const int id = static_cast<int>(t.size());
  std::vector<int> idx(index.begin(), index.end());
  return t.push(std::move(out), size, 1, t.requires_grad(a), [a, idx, id](Tape& tp) {
    const auto g = tp.grad(Var{&tp, id});
    auto ga = tp.grad(a);
    for (std::size_t j = 0; j < idx.size(); ++j) ga[j] += g[static_cast<std::size_t>(idx[j])];
  });
}

Var detach(Var a) { return tape_of(a).constant(copy(a.value()), a.rows(), a.cols()); }

Var softmax(Var a) {
  Tape& t = tape_of(a);
  std::vector<double> out = copy(a.value());
  const double mx = *std::max_element(out.begin(), out.end());
  double z = 0.0;
  for (double& v : out) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : out) v /= z;
  const int id = static_cast<int>(t.size());
  return t.push(std::move(out), a.rows(), a.cols(), t.requires_grad(a), [a, id](Tape& tp) {
    const Var self{&tp, id};
    const auto g = tp.grad(self);
    const auto y = tp.value(self);
    const double gy = simd::dot(g, y);
    auto ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += y[i] * (g[i] - gy);
  });
}

Var log_softmax(Var a) {
  Tape& t = tape_of(a);
  std::vector<double> out = copy(a.value());
  const double mx = *std::max_element(out.begin(), out.end());
  double z = 0.0;
  for (double v : out) z += std::exp(v - mx);
  const double lse = mx + std::log(z);
  for (double& v : out) v -= lse;
  const int id = static_cast<int>(t.size());
  return t.push(std::move(out), a.rows(), a.cols(), t.requires_grad(a), [a, id](Tape& tp) {
    const Var self{&tp, id};
    const auto g = tp.grad(self);
    const auto y = tp.value(self);
    double gs = 0.0;
    for (double v : g) gs += v;
    auto ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] - std::exp(y[i]) * gs;
  });
}

Var additive_scores(Var keys, Var query, Var v) {
  const int n = keys.rows();
  const int k = keys.cols();
  if (static_cast<int>(query.size()) != k || static_cast<int>(v.size()) != k) {
    throw ConfigError("additive_scores: width mismatch");
  }
  Tape& t = tape_of(keys);
  const auto vk = keys.value();
  const auto vq = query.value();
  const auto vv = v.value();
  std::vector<double> hidden(static_cast<std::size_t>(n) * k);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
      const double h = std::tanh(vk[static_cast<std::size_t>(j) * k + i] + vq[i]);
      hidden[static_cast<std::size_t>(j) * k + i] = h;
      s += vv[i] * h;
    }
    out[static_cast<std::size_t>(j)] = s;
  }
  const int id = static_cast<int>(t.size());
  return t.push(std::move(out), n, 1, any_grad({keys, query, v}),
                [keys, query, v, n, k, hidden = std::move(hidden), id](Tape& tp) {
                  const auto g = tp.grad(Var{&tp, id});
                  const auto vv = tp.value(v);
                  auto gk = tp.grad(keys);
                  auto gq = tp.grad(query);
                  auto gv = tp.grad(v);
                  for (int j = 0; j < n; ++j) {
                    const double gj = g[static_cast<std::size_t>(j)];
                    if (gj == 0.0) continue;
                    for (int i = 0; i < k; ++i) {
                      const double h = hidden[static_cast<std::size_t>(j) * k + i];
                      const double dpre = gj * vv[i] * (1.0 - h * h);
                      if (!gk.empty()) gk[static_cast<std::size_t>(j) * k + i] += dpre;
                      if (!gq.empty()) gq[i] += dpre;
                      if (!gv.empty()) gv[i] += gj * h;
                    }
                  }
                });
}

Var gru_cell(Var x, Var h, Var wx, Var wh, Var bx, Var bh) {
  const int hs = static_cast<int>(h.size());
  const int in = static_cast<int>(x.size());
  if (wx.rows() != 3 * hs || wx.cols() != in || wh.rows() != 3 * hs || wh.cols() != hs ||
      static_cast<int>(bx.size()) != 3 * hs || static_cast<int>(bh.size()) != 3 * hs) {
    throw ConfigError("gru_cell: parameter shapes do not match input " + std::to_string(in) +
                      " / hidden " + std::to_string(hs));
  }
  Tape& t = tape_of(x);
  const std::size_t H = static_cast<std::size_t>(hs);
  std::vector<double> gx(3 * H);
  std::vector<double> gh(3 * H);
  simd::gemv(wx.value(), 3 * H, in, x.value(), gx);
  simd::gemv(wh.value(), 3 * H, H, h.value(), gh);
  const auto vbx = bx.value();
  const auto vbh = bh.value();
  for (std::size_t i = 0; i < 3 * H; ++i) {
    gx[i] += vbx[i];
    gh[i] += vbh[i];
  }
  // cache: r, z, n, gh_n
  std::vector<double> cache(4 * H);
  std::vector<double> out(H);
  const auto vh = h.value();
  for (std::size_t i = 0; i < H; ++i) {
    const double r = 1.0 / (1.0 + std::exp(-(gx[i] + gh[i])));
    const double z = 1.0 / (1.0 + std::exp(-(gx[H + i] + gh[H + i])));
    const double n = std::tanh(gx[2 * H + i] + r * gh[2 * H + i]);
    cache[i] = r;
    cache[H + i] = z;
    cache[2 * H + i] = n;
    cache[3 * H + i] = gh[2 * H + i];
    out[i] = (1.0 - z) * n + z * vh[i];
  }
  const int id = static_cast<int>(t.size());
  return t.push(std::move(out), hs, 1, any_grad({x, h, wx, wh, bx, bh}),
                [x, h, wx, wh, bx, bh, H, in, cache = std::move(cache), id](Tape& tp) {
                  const auto g = tp.grad(Var{&tp, id});
                  const auto vh = tp.value(h);
                  std::vector<double> dgx(3 * H);
                  std::vector<double> dgh(3 * H);
                  std::vector<double> dh_direct(H);
                  for (std::size_t i = 0; i < H; ++i) {
                    const double r = cache[i];
                    const double z = cache[H + i];
                    const double n = cache[2 * H + i];
                    const double ghn = cache[3 * H + i];
                    const double dn_pre = g[i] * (1.0 - z) * (1.0 - n * n);
                    const double dz_pre = g[i] * (vh[i] - n) * z * (1.0 - z);
                    const double dr_pre = dn_pre * ghn * r * (1.0 - r);
                    dh_direct[i] = g[i] * z;
                    dgx[i] = dr_pre;
                    dgx[H + i] = dz_pre;
                    dgx[2 * H + i] = dn_pre;
                    dgh[i] = dr_pre;
                    dgh[H + i] = dz_pre;
                    dgh[2 * H + i] = dn_pre * r;
                  }
                  if (auto gwx = tp.grad(wx); !gwx.empty()) simd::ger_acc(gwx, 3 * H, in, dgx, tp.value(x));
                  if (auto gwh = tp.grad(wh); !gwh.empty()) simd::ger_acc(gwh, 3 * H, H, dgh, vh);
                  if (auto gbx = tp.grad(bx); !gbx.empty()) {
                    for (std::size_t i = 0; i < 3 * H; ++i) gbx[i] += dgx[i];
                  }
                  if (auto gbh = tp.grad(bh); !gbh.empty()) {
                    for (std::size_t i = 0; i < 3 * H; ++i) gbh[i] += dgh[i];
                  }
                  if (auto gxv = tp.grad(x); !gxv.empty()) simd::gemv_t_acc(tp.value(wx), 3 * H, in, dgx, gxv);
                  if (auto ghv = tp.grad(h); !ghv.empty()) {
                    simd::gemv_t_acc(tp.value(wh), 3 * H, H, dgh, ghv);
                    for (std::size_t i = 0; i < H; ++i) ghv[i] += dh_direct[i];
                  }
                });
}

}  // namespace dicr::ad
