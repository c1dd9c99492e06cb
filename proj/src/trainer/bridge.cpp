#include "dicr/trainer/bridge.hpp"

#include <algorithm>
#include <cmath>

#include "dicr/converse/pipeline.hpp"
#include "dicr/error.hpp"

namespace dicr::trainer {

double transform_probability(double x, RewardTransform transform) {
  x = std::clamp(x, kBridgeEpsilon, 1.0 - kBridgeEpsilon);
  return transform == RewardTransform::kLogit ? std::log(x) - std::log1p(-x) : std::log(x) + std::log1p(-x);
}

double bridge_knowledge_reward(const kg::ReasonPath& path, std::span<const kg::ReasonPath> beam,
                               std::span<const double> mu, RewardTransform transform) {
  if (beam.size() != mu.size()) throw PreconditionError("beam and posterior weights differ in length");
  for (std::size_t i = 0; i < beam.size(); ++i) {
    if (beam[i].same_route(path)) return transform_probability(mu[i], transform);
  }
  return 0.0;
}

double bridge_semantic_reward_encoded(converse::ConverseModel& model, std::span<const double> o_segment,
                                      std::span<const double> o_u, RewardTransform transform) {
  if (o_u.empty()) return 0.0;
  return transform_probability(converse::mim_probability(model, o_segment, o_u), transform);
}

double bridge_semantic_reward(converse::ConverseModel& model, std::span<const int> segment_ids,
                              std::span<const double> o_u, RewardTransform transform) {
  if (o_u.empty()) return 0.0;
  const auto o_seg = converse::semantic_summary(model, segment_ids);
  return bridge_semantic_reward_encoded(model, o_seg, o_u, transform);
}

}  // namespace dicr::trainer
