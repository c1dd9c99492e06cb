#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "dicr/ad/parameter.hpp"
#include "dicr/ad/tape.hpp"

namespace dicr::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "param[index]"
  std::size_t checked = 0;
};

// Central differences of loss(tape).item() against the backward pass, over
// the parameters of `store` whose names pass `select`.  At most
// `per_param` entries of each parameter are probed, spread evenly.
// Relative error is |a - n| / max(|a|, |n|, floor).
inline GradCheckResult grad_check(ad::ParameterStore& store, const std::function<ad::Var(ad::Tape&)>& loss,
                                  const std::function<bool(const std::string&)>& select, double step = 1e-3,
                                  std::size_t per_param = 1000000, double floor = 1e-6) {
  store.zero_grad();
  {
    ad::Tape tape;
    auto l = loss(tape);
    tape.backward(l);
  }
  GradCheckResult out;
  for (std::size_t pi = 0; pi < store.size(); ++pi) {
    auto& p = store.at(pi);
    if (!select(p.name())) continue;
    const std::vector<double> analytic(p.grad().begin(), p.grad().end());
    const std::size_t n = p.size();
    const std::size_t stride = std::max<std::size_t>(1, n / std::min(n, per_param));
    for (std::size_t i = 0; i < n; i += stride) {
      const double orig = p.value()[i];
      p.value()[i] = orig + step;
      double up, down;
      {
        ad::Tape t;
        up = loss(t).item();
      }
      p.value()[i] = orig - step;
      {
        ad::Tape t;
        down = loss(t).item();
      }
      p.value()[i] = orig;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      ++out.checked;
      if (rel > out.max_rel_error) {
        out.max_rel_error = rel;
        out.worst = p.name() + "[" + std::to_string(i) + "] analytic " + std::to_string(a) + " numeric " +
                    std::to_string(numeric);
      }
    }
  }
  store.zero_grad();
  return out;
}

}  // namespace dicr::testing
