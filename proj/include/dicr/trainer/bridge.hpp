#pragma once

#include <span>
#include <vector>

#include "dicr/converse/model.hpp"
#include "dicr/kg/path.hpp"
#include "dicr/trainer/config.hpp"

namespace dicr::trainer {

// Probabilities are clamped to [kBridgeEpsilon, 1 - kBridgeEpsilon].
inline constexpr double kBridgeEpsilon = 1e-6;

// as-written: log x + log(1 - x); logit: log x - log(1 - x).
double transform_probability(double x, RewardTransform transform);

// R_k: transform of mu_i when `path` is beam[i], 0 for off-beam paths.
double bridge_knowledge_reward(const kg::ReasonPath& path, std::span<const kg::ReasonPath> beam,
                               std::span<const double> mu, RewardTransform transform);

// R_s: transform of the MIM score between the encoded hop statement and o_U.
// Returns 0 when the gold statement is unknown (empty o_U).
double bridge_semantic_reward(converse::ConverseModel& model, std::span<const int> segment_ids,
                              std::span<const double> o_u, RewardTransform transform);

// Same from an already encoded segment.
double bridge_semantic_reward_encoded(converse::ConverseModel& model, std::span<const double> o_segment,
                                      std::span<const double> o_u, RewardTransform transform);

}  // namespace dicr::trainer
