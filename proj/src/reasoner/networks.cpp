#include "dicr/reasoner/networks.hpp"

#include <algorithm>
#include <cmath>

#include "dicr/error.hpp"
#include "dicr/simd/kernels.hpp"

namespace dicr::reasoner {
namespace {

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

std::vector<double> mlp2_elu(const ad::Parameter& w1, const ad::Parameter& w2, std::span<const double> x) {
  std::vector<double> h(static_cast<std::size_t>(w1.rows()));
  simd::gemv(w1.value(), w1.rows(), w1.cols(), x, h);
  for (double& v : h) v = elu(v);
  std::vector<double> o(static_cast<std::size_t>(w2.rows()));
  simd::gemv(w2.value(), w2.rows(), w2.cols(), h, o);
  for (double& v : o) v = elu(v);
  return o;
}

void check_state(const PolicyNetworks& nets, std::size_t n) {
  if (static_cast<int>(n) != nets.shape().state_dim()) {
    throw ConfigError("state length " + std::to_string(n) + " does not match networks (" +
                      std::to_string(nets.shape().state_dim()) + ")");
  }
}

double clamp_prob(double p) { return std::clamp(p, kDiscEpsilon, 1.0 - kDiscEpsilon); }

}  // namespace

PolicyNetworks::PolicyNetworks(const NetworkShape& shape) : shape_(shape) {
  if (shape.dim < 1 || shape.history < 0 || shape.actor_hidden < 1 || shape.critic_hidden < 1 ||
      shape.disc_hidden < 1 || shape.num_entities < 1 || shape.num_relations < 1) {
    throw ConfigError("invalid policy network shape");
  }
  const int s = shape.state_dim();
  const int d = shape.dim;
  actor_w1_ = &store_.add("actor.w1", shape.actor_hidden, s);
  actor_w2_ = &store_.add("actor.w2", 2 * d, shape.actor_hidden);
  actor_self_loop_ = &store_.add("actor.self_loop", 1, d);
  critic_w1_ = &store_.add("critic.w1", shape.critic_hidden, s);
  critic_w2_ = &store_.add("critic.w2", 2 * d, shape.critic_hidden);
  critic_rel_ = &store_.add("critic.rel", shape.num_relations + 1, d);
  critic_ent_ = &store_.add("critic.ent", shape.num_entities, d);
  disc_w_ = &store_.add("disc.w", shape.disc_hidden, s + 2 * d);
  disc_b_ = &store_.add("disc.b", shape.disc_hidden, 1);
  disc_rel_ = &store_.add("disc.rel", shape.num_relations + 1, d);
  disc_ent_ = &store_.add("disc.ent", shape.num_entities, d);
}

void PolicyNetworks::init(Rng& rng) {
  for (std::size_t i = 0; i < store_.size(); ++i) {
    auto& p = store_.at(i);
    if (p.cols() == 1) {
      p.init_uniform(rng, 1.0 / std::sqrt(static_cast<double>(p.rows())));
    } else {
      p.init_uniform(rng);
    }
  }
}

int PolicyNetworks::relation_row(const Action& a) const {
  return a.is_self_loop() ? shape_.num_relations : a.relation;
}

void PolicyNetworks::check_action(const Action& a) const {
  if ((!a.is_self_loop() && (a.relation < 0 || a.relation >= shape_.num_relations)) || a.entity < 0 ||
      a.entity >= shape_.num_entities) {
    throw LookupError("unknown action (" + std::to_string(a.relation) + ", " + std::to_string(a.entity) + ")");
  }
}

std::vector<double> policy_forward(const PolicyNetworks& nets, std::span<const double> state,
                                   const ActionSpace& space, const kg::EmbeddingTable& emb) {
  check_state(nets, state.size());
  if (space.actions.empty()) throw ConfigError("empty action space");
  const auto d = static_cast<std::size_t>(nets.shape().dim);
  const auto h = mlp2_elu(nets.actor_w1(), nets.actor_w2(), state);
  const std::span<const double> hr(h.data(), d);
  const std::span<const double> he(h.data() + d, d);
  std::vector<double> logits(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Action& a = space.actions[i];
    const auto rel = a.is_self_loop() ? nets.actor_self_loop().row(0) : emb.relation(a.relation);
    logits[i] = simd::dot(rel, hr) + simd::dot(emb.entity(a.entity), he);
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& v : logits) z += (v = std::exp(v - mx));
  for (double& v : logits) v /= z;
  return logits;
}

std::vector<double> critic_q_all(const PolicyNetworks& nets, std::span<const double> state,
                                 const ActionSpace& space) {
  check_state(nets, state.size());
  const auto d = static_cast<std::size_t>(nets.shape().dim);
  const auto h = mlp2_elu(nets.critic_w1(), nets.critic_w2(), state);
  std::vector<double> q(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Action& a = space.actions[i];
    nets.check_action(a);
    q[i] = simd::dot(nets.critic_rel().row(nets.relation_row(a)), std::span<const double>(h.data(), d)) +
           simd::dot(nets.critic_ent().row(a.entity), std::span<const double>(h.data() + d, d));
  }
  return q;
}

double critic_q(const PolicyNetworks& nets, std::span<const double> state, const Action& a) {
  ActionSpace one;
  one.actions.push_back(a);
  return critic_q_all(nets, state, one)[0];
}

double disc_path_score(const PolicyNetworks& nets, std::span<const double> state, const Action& a) {
  check_state(nets, state.size());
  nets.check_action(a);
  std::vector<double> x(state.begin(), state.end());
  const auto rel = nets.disc_rel().row(nets.relation_row(a));
  const auto ent = nets.disc_ent().row(a.entity);
  x.insert(x.end(), rel.begin(), rel.end());
  x.insert(x.end(), ent.begin(), ent.end());
  for (double& v : x) v = std::tanh(v);
  std::vector<double> h(static_cast<std::size_t>(nets.disc_w().rows()));
  simd::gemv(nets.disc_w().value(), nets.disc_w().rows(), nets.disc_w().cols(), x, h);
  for (double& v : h) v = std::tanh(v);
  const double logit = simd::dot(nets.disc_b().value(), h);
  return clamp_prob(1.0 / (1.0 + std::exp(-logit)));
}

ad::Var policy_logits(ad::Tape& tape, PolicyNetworks& nets, ad::Var state, const ActionSpace& space,
                      const kg::EmbeddingTable& emb) {
  check_state(nets, state.size());
  const int d = nets.shape().dim;
  auto h = ad::elu(ad::matvec(tape.param(nets.actor_w2()),
                              ad::elu(ad::matvec(tape.param(nets.actor_w1()), state))));
  const std::size_t n_edges = space.size() - 1;
  std::vector<ad::Var> parts;
  if (n_edges > 0) {
    std::vector<double> a(n_edges * 2 * static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < n_edges; ++i) {
      const Action& act = space.actions[i];
      const auto r = emb.relation(act.relation);
      const auto e = emb.entity(act.entity);
      std::copy(r.begin(), r.end(), a.begin() + static_cast<long>(i * 2 * d));
      std::copy(e.begin(), e.end(), a.begin() + static_cast<long>(i * 2 * d + d));
    }
    parts.push_back(ad::rows_dot(tape.constant(std::move(a), static_cast<int>(n_edges), 2 * d), h));
  }
  const Action& loop = space.actions.back();
  const auto e = emb.entity(loop.entity);
  ad::Var self_parts[] = {tape.row(nets.actor_self_loop(), 0), tape.constant({e.begin(), e.end()})};
  parts.push_back(ad::dot(ad::concat(self_parts), h));
  return ad::concat(parts);
}

ad::Var critic_values(ad::Tape& tape, PolicyNetworks& nets, ad::Var state, const ActionSpace& space) {
  check_state(nets, state.size());
  const int d = nets.shape().dim;
  auto h = ad::elu(ad::matvec(tape.param(nets.critic_w2()),
                              ad::elu(ad::matvec(tape.param(nets.critic_w1()), state))));
  std::vector<int> rel_rows;
  std::vector<int> ent_rows;
  for (const auto& a : space.actions) {
    nets.check_action(a);
    rel_rows.push_back(nets.relation_row(a));
    ent_rows.push_back(a.entity);
  }
  return ad::add(ad::gather_dot(tape.param(nets.critic_rel()), rel_rows, ad::slice(h, 0, d)),
                 ad::gather_dot(tape.param(nets.critic_ent()), ent_rows, ad::slice(h, d, d)));
}

ad::Var disc_score(ad::Tape& tape, PolicyNetworks& nets, ad::Var state, const Action& a) {
  check_state(nets, state.size());
  nets.check_action(a);
  ad::Var parts[] = {state, tape.row(nets.disc_rel(), nets.relation_row(a)), tape.row(nets.disc_ent(), a.entity)};
  auto x = ad::tanh(ad::concat(parts));
  auto h = ad::tanh(ad::matvec(tape.param(nets.disc_w()), x));
  auto logit = ad::dot(tape.param(nets.disc_b()), h);
  return ad::clamp(ad::sigmoid(logit), kDiscEpsilon, 1.0 - kDiscEpsilon);
}

double disc_loss(double score_fake, double score_real) {
  return -(std::log(1.0 - score_fake) + std::log(score_real));
}

ad::Var disc_loss(ad::Var score_fake, ad::Var score_real) {
  return ad::neg(ad::add(ad::log(ad::one_minus(score_fake)), ad::log(score_real)));
}

double path_reward(double score) { return std::log(score) - std::log(1.0 - score); }

double terminal_reward(const kg::ReasonPath& path, std::span<const EntityId> gold_items) {
  if (!path.terminal || gold_items.empty()) return 0.0;
  return std::find(gold_items.begin(), gold_items.end(), path.last()) != gold_items.end() ? 1.0 : 0.0;
}

double aggregate_reward(const RewardBundle& b, std::size_t path_length, std::size_t max_len) {
  const auto& w = b.weights;
  if (w.alpha < 0.0 || w.beta < 0.0 || w.gamma < 0.0 || w.alpha + w.beta + w.gamma > 1.0) {
    throw ConfigError("reward weights must be non-negative and sum to at most 1");
  }
  const double beta = path_length < max_len ? 0.0 : w.beta;
  return w.alpha * b.path + beta * b.knowledge + w.gamma * b.semantic +
         (1.0 - w.alpha - beta - w.gamma) * b.terminal;
}

double aggregate_reward_pre_joint(double path, double terminal, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must lie in [0, 1]");
  return alpha * path + (1.0 - alpha) * terminal;
}

}  // namespace dicr::reasoner
