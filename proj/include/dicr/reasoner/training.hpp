#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "dicr/ad/adam.hpp"
#include "dicr/reasoner/search.hpp"

namespace dicr::reasoner {

struct ActorCriticOptions {
  double entropy_weight = 0.01;
  double discount = 1.0;
  // Let -E_pi[Q] also train the critic.
  bool critic_through_actor_term = false;
  // Differentiate through the bootstrap target E_pi[Q(s_{t+1}, .)].
  bool bootstrap_gradient = false;
};

// sum_t -E_pi Q(s_t, .) + (Q(s_t, a_t) - G_t)^2 - w H(pi_t), with
// G_t = R_t + discount * E_pi Q(s_{t+1}, .) and no bootstrap after the last step.
ad::Var actor_critic_loss(ad::Tape& tape, PolicyNetworks& nets, const kg::EmbeddingTable& emb,
                          std::span<const StepRecord> steps, std::span<const double> rewards,
                          const ActorCriticOptions& options);

struct GoldStep {
  std::vector<double> state;
  Action action;
};

// Replays a gold path through the state encoder; a path shorter than
// max_len ends with its self-loop step.
std::vector<GoldStep> gold_replay(const kg::ReasonPath& gold, std::span<const double> preference,
                                  const SearchLimits& limits, const kg::EmbeddingTable& emb);

// Conversation-side rewards used during joint training.
struct BridgeHooks {
  // R_k for a finished path of example i.
  std::function<double(std::size_t, const kg::ReasonPath&)> knowledge;
  // R_s for the hop (h, r, t) of example i.
  std::function<double(std::size_t, EntityId, RelationId, EntityId)> semantic;
};

struct RecTrainConfig {
  SearchLimits limits;
  RewardWeights weights;
  ActorCriticOptions actor_critic;
  int epochs = 10;
  int batch_size = 32;
  double learning_rate = 1e-4;
  double grad_clip = 5.0;
  std::uint64_t seed = 7;
  // Fake term of L_tau as the expectation over the policy at each visited
  // state rather than the single sampled action.
  bool disc_expected_fake = true;
};

struct RecItem {
  std::size_t example_index = 0;
  EpisodeStart start;
  std::vector<EntityId> gold_items;
  std::vector<GoldStep> gold;
};

// Examples with a start entity and a gold path.
std::vector<RecItem> make_rec_items(std::span<const corpus::TrainingExample> examples,
                                    const kg::EmbeddingTable& emb, const SearchLimits& limits);

struct BatchStats {
  double reward = 0.0;    // mean per-episode sum of aggregate rewards
  double terminal = 0.0;  // mean terminal reward
  double disc_loss = 0.0; // mean per discriminator pair
  double loss = 0.0;
};

// One sampled-episode batch: rollouts, rewards, L_REC backward and an Adam step.
// With hooks the joint aggregate reward is used, otherwise the pre-joint one.
BatchStats rec_update(PolicyNetworks& nets, ad::Adam& adam, const kg::KnowledgeGraph& kg,
                      const kg::EmbeddingTable& emb, std::span<const RecItem> batch, const RecTrainConfig& config,
                      const BridgeHooks* hooks, Rng& rng);

struct EpochStats {
  int epoch = 0;
  double reward = 0.0;
  double disc_loss = 0.0;
  double recall1 = 0.0;
  double terminal = 0.0;
};

void write_curve_csv(std::ostream& os, std::span<const EpochStats> curve);

double greedy_recall1(const PolicyNetworks& nets, const kg::KnowledgeGraph& kg, const kg::EmbeddingTable& emb,
                      std::span<const corpus::TrainingExample> examples, const SearchLimits& limits);

enum class FakeSegments {
  // Segments of uniform random walks from the episode start.
  kRandomWalk,
  // Gold states paired with a uniformly drawn non-gold action.
  kGoldStateRandomAction,
};

// Share of correctly classified segments: gold segments should score above
// 0.5, fake ones below.  Fakes identical to the gold segment of the same
// step are skipped.
double discriminator_accuracy(const PolicyNetworks& nets, const kg::KnowledgeGraph& kg,
                              const kg::EmbeddingTable& emb, std::span<const corpus::TrainingExample> examples,
                              const SearchLimits& limits, Rng& rng, FakeSegments fakes = FakeSegments::kRandomWalk);

using EpochCallback = std::function<void(const EpochStats&)>;

std::vector<EpochStats> train_rec(PolicyNetworks& nets, const kg::KnowledgeGraph& kg, const kg::EmbeddingTable& emb,
                                  std::span<const corpus::TrainingExample> train,
                                  std::span<const corpus::TrainingExample> valid, const RecTrainConfig& config,
                                  const BridgeHooks* hooks = nullptr, const EpochCallback& on_epoch = {});

}  // namespace dicr::reasoner
