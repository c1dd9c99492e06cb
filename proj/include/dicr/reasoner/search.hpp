#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dicr/corpus/example.hpp"
#include "dicr/reasoner/networks.hpp"

namespace dicr::reasoner {

struct SearchLimits {
  int history = 1;
  std::size_t max_len = 3;
  std::size_t action_cap = 250;
};

// Where an episode starts and what it is conditioned on.
struct EpisodeStart {
  EntityId start = kg::kNoEntity;
  std::vector<double> preference;
};

// Start at the most recently mentioned context entity; u is the mean of all
// context entities.  Empty when the context mentions nothing.
std::optional<EpisodeStart> episode_start(const corpus::TrainingExample& example, const kg::EmbeddingTable& emb);

struct StepRecord {
  kg::ReasonPath prefix;  // path before the action
  std::vector<double> state;
  ActionSpace space;
  int chosen = 0;
};

struct Rollout {
  kg::ReasonPath path;
  std::vector<StepRecord> steps;
};

enum class RolloutMode { kSample, kGreedy };

// Ends on a self-loop or after max_len hops.  rng is only used when sampling.
Rollout rollout(const PolicyNetworks& nets, const kg::KnowledgeGraph& kg, const kg::EmbeddingTable& emb,
                const EpisodeStart& start, const SearchLimits& limits, RolloutMode mode, Rng* rng = nullptr);

// Up to n_paths distinct complete paths by descending cumulative log
// probability.
std::vector<kg::ReasonPath> beam_search(const PolicyNetworks& nets, const kg::KnowledgeGraph& kg,
                                        const kg::EmbeddingTable& emb, const EpisodeStart& start,
                                        const SearchLimits& limits, std::size_t width, std::size_t n_paths);

// Final entities of ranked paths, first occurrence kept.
std::vector<EntityId> ranked_items(std::span<const kg::ReasonPath> paths);

}  // namespace dicr::reasoner
