#include "dicr/ad/adam.hpp"

#include <cmath>

namespace dicr::ad {

Adam::Adam(ParameterStore& store, AdamConfig config) : store_(&store), config_(config) {
  m_.resize(store.size());
  v_.resize(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    m_[i].assign(store.at(i).size(), 0.0);
    v_[i].assign(store.at(i).size(), 0.0);
  }
}

void Adam::step() {
  ++steps_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double lr = config_.learning_rate;
  for (std::size_t p = 0; p < store_->size(); ++p) {
    Parameter& param = store_->at(p);
    auto value = param.value();
    auto grad = param.grad();
    auto& m = m_[p];
    auto& v = v_[p];
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      // Untouched embedding rows keep their moments frozen.
      if (g == 0.0 && m[i] == 0.0) continue;
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      value[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
      grad[i] = 0.0;
    }
  }
}

}  // namespace dicr::ad
