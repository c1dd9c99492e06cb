#pragma once

#include <span>
#include <vector>

#include "dicr/ad/ops.hpp"
#include "dicr/ad/parameter.hpp"
#include "dicr/reasoner/state.hpp"
#include "dicr/util/rng.hpp"

namespace dicr::reasoner {

inline constexpr double kDiscEpsilon = 1e-6;

struct NetworkShape {
  int dim = 128;
  int history = 1;
  int actor_hidden = 256;
  int critic_hidden = 256;
  int disc_hidden = 128;
  std::int32_t num_entities = 0;
  std::int32_t num_relations = 0;
  int state_dim() const { return (2 * history + 2) * dim; }
};

// Actor, critic and path discriminator.  Action embeddings for the actor
// come from the frozen KG table; the critic and discriminator own theirs.
// Row num_relations of the relation tables stands for the self-loop.
class PolicyNetworks {
 public:
  explicit PolicyNetworks(const NetworkShape& shape);
  void init(Rng& rng);

  const NetworkShape& shape() const { return shape_; }
  ad::ParameterStore& store() { return store_; }
  const ad::ParameterStore& store() const { return store_; }

  ad::Parameter& actor_w1() { return *actor_w1_; }
  ad::Parameter& actor_w2() { return *actor_w2_; }
  ad::Parameter& actor_self_loop() { return *actor_self_loop_; }
  ad::Parameter& critic_w1() { return *critic_w1_; }
  ad::Parameter& critic_w2() { return *critic_w2_; }
  ad::Parameter& critic_rel() { return *critic_rel_; }
  ad::Parameter& critic_ent() { return *critic_ent_; }
  ad::Parameter& disc_w() { return *disc_w_; }
  ad::Parameter& disc_b() { return *disc_b_; }
  ad::Parameter& disc_rel() { return *disc_rel_; }
  ad::Parameter& disc_ent() { return *disc_ent_; }
  const ad::Parameter& actor_w1() const { return *actor_w1_; }
  const ad::Parameter& actor_w2() const { return *actor_w2_; }
  const ad::Parameter& actor_self_loop() const { return *actor_self_loop_; }
  const ad::Parameter& critic_w1() const { return *critic_w1_; }
  const ad::Parameter& critic_w2() const { return *critic_w2_; }
  const ad::Parameter& critic_rel() const { return *critic_rel_; }
  const ad::Parameter& critic_ent() const { return *critic_ent_; }
  const ad::Parameter& disc_w() const { return *disc_w_; }
  const ad::Parameter& disc_b() const { return *disc_b_; }
  const ad::Parameter& disc_rel() const { return *disc_rel_; }
  const ad::Parameter& disc_ent() const { return *disc_ent_; }

  // Row of the critic / discriminator relation tables for an action.
  int relation_row(const Action& a) const;
  void check_action(const Action& a) const;

 private:
  NetworkShape shape_;
  ad::ParameterStore store_;
  ad::Parameter* actor_w1_;
  ad::Parameter* actor_w2_;
  ad::Parameter* actor_self_loop_;
  ad::Parameter* critic_w1_;
  ad::Parameter* critic_w2_;
  ad::Parameter* critic_rel_;
  ad::Parameter* critic_ent_;
  ad::Parameter* disc_w_;
  ad::Parameter* disc_b_;
  ad::Parameter* disc_rel_;
  ad::Parameter* disc_ent_;
};

// pi = softmax(A_t . elu(W2 elu(W1 s))); A_t rows are [r ; e].
std::vector<double> policy_forward(const PolicyNetworks& nets, std::span<const double> state,
                                   const ActionSpace& space, const kg::EmbeddingTable& emb);
// Q = a_delta . elu(Wd2 elu(Wd1 s)).
double critic_q(const PolicyNetworks& nets, std::span<const double> state, const Action& a);
std::vector<double> critic_q_all(const PolicyNetworks& nets, std::span<const double> state,
                                 const ActionSpace& space);
// sigma(b . tanh(W tanh(s (+) a_p))), clamped to [eps, 1 - eps].
double disc_path_score(const PolicyNetworks& nets, std::span<const double> state, const Action& a);

// Differentiable counterparts.
ad::Var policy_logits(ad::Tape& tape, PolicyNetworks& nets, ad::Var state, const ActionSpace& space,
                      const kg::EmbeddingTable& emb);
ad::Var critic_values(ad::Tape& tape, PolicyNetworks& nets, ad::Var state, const ActionSpace& space);
ad::Var disc_score(ad::Tape& tape, PolicyNetworks& nets, ad::Var state, const Action& a);

// -(log(1 - fake) + log(real))
double disc_loss(double score_fake, double score_real);
ad::Var disc_loss(ad::Var score_fake, ad::Var score_real);

// log(score) - log(1 - score)
double path_reward(double score);

// 1 iff the path is terminal and ends on a gold item.
double terminal_reward(const kg::ReasonPath& path, std::span<const EntityId> gold_items);

struct RewardWeights {
  double alpha = 0.006;
  double beta = 0.001;
  double gamma = 0.006;
};

struct RewardBundle {
  double terminal = 0.0;
  double path = 0.0;
  double knowledge = 0.0;
  double semantic = 0.0;
  RewardWeights weights;
};

// alpha R_p + beta R_k + gamma R_s + (1 - alpha - beta - gamma) R_T, with
// beta dropped for paths shorter than max_len.
double aggregate_reward(const RewardBundle& bundle, std::size_t path_length, std::size_t max_len);
// Before joint training: alpha R_p + (1 - alpha) R_T.
double aggregate_reward_pre_joint(double path, double terminal, double alpha);

}  // namespace dicr::reasoner
