#pragma once

#include <vector>

#include "dicr/ad/parameter.hpp"

namespace dicr::ad {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adaptive-moment optimizer bound to one ParameterStore.
class Adam {
 public:
  Adam(ParameterStore& store, AdamConfig config);

  // Applies the accumulated gradients, then clears them.
  void step();
  long steps() const { return steps_; }
  const AdamConfig& config() const { return config_; }

 private:
  ParameterStore* store_;
  AdamConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  long steps_ = 0;
};

}  // namespace dicr::ad
