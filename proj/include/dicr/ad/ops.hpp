#pragma once

#include <span>
#include <vector>

#include "dicr/ad/tape.hpp"

// Differentiable operations on Tape variables.  Vectors are n x 1; matrices
// are row-major.  Shape mismatches throw ConfigError.
namespace dicr::ad {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);                  // elementwise
Var scale(Var a, double c);
Var neg(Var a);
Var one_minus(Var a);                   // 1 - a
Var mul_scalar(Var s, Var v);           // s is 1 x 1
Var add_all(std::span<const Var> terms);

Var tanh(Var a);
Var sigmoid(Var a);
Var elu(Var a);
Var exp(Var a);
Var log(Var a);
// log(max(a, floor)); zero gradient where the floor is active.
Var log_floor(Var a, double floor);
// Values outside [lo, hi] are clamped and pass no gradient.
Var clamp(Var a, double lo, double hi);

Var matvec(Var w, Var x);               // (r x c) * c -> r
Var matmul_rows(Var m, Var w);          // rows of m (n x c) times w^T (r x c) -> n x r
Var rows_dot(Var m, Var q);             // (n x c) * c -> n
Var weighted_rows(Var m, Var weights);  // sum_j weights_j * m_j -> c
Var dot(Var a, Var b);                  // -> 1 x 1
// out_j = m[rows_j] . q, rows of m selected by index.
Var gather_dot(Var m, std::span<const int> rows, Var q);
Var sum(Var a);
Var mean(Var a);

Var concat(std::span<const Var> parts);
Var stack(std::span<const Var> rows);   // k vectors of length c -> k x c
Var slice(Var a, int offset, int length);
Var row_of(Var m, int r);
Var pick(Var a, int index);             // -> 1 x 1
// First `length` entries of a, zero padded when a is shorter.
Var pad_or_truncate(Var a, int length);
// out[index[j]] += a[j], out has `size` entries.
Var scatter_add(Var a, std::span<const int> index, int size);

// Same value, no gradient flows back through it.
Var detach(Var a);

Var softmax(Var a);
Var log_softmax(Var a);

// s_j = v . tanh(keys_j + query) for keys (n x k); the additive attention score.
Var additive_scores(Var keys, Var query, Var v);

// Gated recurrent unit step, gate order (reset, update, candidate):
//   r = sig(Wx_r x + bx_r + Wh_r h + bh_r)
//   z = sig(Wx_z x + bx_z + Wh_z h + bh_z)
//   n = tanh(Wx_n x + bx_n + r * (Wh_n h + bh_n))
//   h' = (1 - z) * n + z * h
Var gru_cell(Var x, Var h, Var wx, Var wh, Var bx, Var bh);

}  // namespace dicr::ad
