#include "dicr/reasoner/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "dicr/error.hpp"

namespace dicr::reasoner {

ad::Var actor_critic_loss(ad::Tape& tape, PolicyNetworks& nets, const kg::EmbeddingTable& emb,
                          std::span<const StepRecord> steps, std::span<const double> rewards,
                          const ActorCriticOptions& options) {
  if (steps.empty()) throw PreconditionError("empty episode");
  if (rewards.size() != steps.size()) throw PreconditionError("one reward per step required");
  const std::size_t n = steps.size();
  std::vector<ad::Var> pi(n), logp(n), q(n);
  for (std::size_t t = 0; t < n; ++t) {
    auto s = tape.constant(steps[t].state);
    logp[t] = ad::log_softmax(policy_logits(tape, nets, s, steps[t].space, emb));
    pi[t] = ad::exp(logp[t]);
    q[t] = critic_values(tape, nets, s, steps[t].space);
  }
  std::vector<ad::Var> terms;
  for (std::size_t t = 0; t < n; ++t) {
    auto q_actor = options.critic_through_actor_term ? q[t] : ad::detach(q[t]);
    terms.push_back(ad::neg(ad::dot(pi[t], q_actor)));
    ad::Var target = tape.scalar(rewards[t]);
    if (t + 1 < n) {
      auto v_next = ad::dot(pi[t + 1], q[t + 1]);
      if (!options.bootstrap_gradient) v_next = ad::detach(v_next);
      target = ad::add(target, ad::scale(v_next, options.discount));
    }
    auto td = ad::sub(ad::pick(q[t], steps[t].chosen), target);
    terms.push_back(ad::mul(td, td));
    if (options.entropy_weight != 0.0) {
      // -w * H(pi) = w * sum pi log pi
      terms.push_back(ad::scale(ad::dot(pi[t], logp[t]), options.entropy_weight));
    }
  }
  return ad::add_all(terms);
}

std::vector<GoldStep> gold_replay(const kg::ReasonPath& gold, std::span<const double> preference,
                                  const SearchLimits& limits, const kg::EmbeddingTable& emb) {
  std::vector<GoldStep> out;
  kg::ReasonPath prefix;
  prefix.entities.push_back(gold.start());
  for (std::size_t k = 0; k < gold.length(); ++k) {
    Action a{gold.relations[k], gold.entities[k + 1]};
    out.push_back(GoldStep{encode_state(preference, prefix, limits.history, emb), a});
    prefix = extend(prefix, a);
  }
  if (gold.length() < limits.max_len) {
    out.push_back(GoldStep{encode_state(preference, prefix, limits.history, emb), Action{kSelfLoop, prefix.last()}});
  }
  return out;
}

std::vector<RecItem> make_rec_items(std::span<const corpus::TrainingExample> examples,
                                    const kg::EmbeddingTable& emb, const SearchLimits& limits) {
  std::vector<RecItem> out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    if (!ex.gold_path) continue;
    auto start = episode_start(ex, emb);
    if (!start) continue;
    RecItem item;
    item.example_index = i;
    item.gold_items = ex.gold_items;
    item.gold = gold_replay(ex.gold_path->path, start->preference, limits, emb);
    item.start = std::move(*start);
    out.push_back(std::move(item));
  }
  return out;
}

BatchStats rec_update(PolicyNetworks& nets, ad::Adam& adam, const kg::KnowledgeGraph& kg,
                      const kg::EmbeddingTable& emb, std::span<const RecItem> batch, const RecTrainConfig& config,
                      const BridgeHooks* hooks, Rng& rng) {
  if (batch.empty()) throw PreconditionError("empty batch");
  BatchStats stats;
  std::size_t disc_pairs = 0;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  nets.store().zero_grad();
  for (const auto& item : batch) {
    const Rollout ro = rollout(nets, kg, emb, item.start, config.limits, RolloutMode::kSample, &rng);
    if (ro.steps.empty()) continue;
    const std::size_t n = ro.steps.size();
    const double r_terminal = terminal_reward(ro.path, item.gold_items);
    std::vector<double> rewards(n);
    ad::Tape tape;
    std::vector<ad::Var> disc_terms;
    for (std::size_t t = 0; t < n; ++t) {
      const auto& step = ro.steps[t];
      const Action& a = step.space.actions[static_cast<std::size_t>(step.chosen)];
      const GoldStep& gold = item.gold[std::min(t, item.gold.size() - 1)];
      const double d_fake = disc_path_score(nets, step.state, a);
      const double r_path = path_reward(d_fake);
      const double r_t = t + 1 == n ? r_terminal : 0.0;
      if (hooks == nullptr) {
        rewards[t] = aggregate_reward_pre_joint(r_path, r_t, config.weights.alpha);
      } else {
        RewardBundle b;
        b.weights = config.weights;
        b.path = r_path;
        b.terminal = r_t;
        if (t + 1 == n && hooks->knowledge) b.knowledge = hooks->knowledge(item.example_index, ro.path);
        if (!a.is_self_loop() && hooks->semantic) {
          b.semantic = hooks->semantic(item.example_index, step.prefix.last(), a.relation, a.entity);
        }
        rewards[t] = aggregate_reward(b, ro.path.length(), config.limits.max_len);
      }
      stats.reward += rewards[t] * inv_batch;

      // A fake identical to the gold segment of the same step is not a fake.
      const bool same_state = step.state == gold.state;
      auto real = disc_score(tape, nets, tape.constant(gold.state), gold.action);
      std::vector<ad::Var> pair{ad::neg(ad::log(real))};
      if (config.disc_expected_fake) {
        const auto probs = policy_forward(nets, step.state, step.space, emb);
        auto s_fake = tape.constant(step.state);
        for (std::size_t i = 0; i < step.space.size(); ++i) {
          const Action& fa = step.space.actions[i];
          if (same_state && fa == gold.action) continue;
          auto fake = disc_score(tape, nets, s_fake, fa);
          pair.push_back(ad::scale(ad::neg(ad::log(ad::one_minus(fake))), probs[i]));
        }
      } else if (!(same_state && a == gold.action)) {
        auto fake = disc_score(tape, nets, tape.constant(step.state), a);
        pair.push_back(ad::neg(ad::log(ad::one_minus(fake))));
      }
      disc_terms.push_back(ad::add_all(pair));
      ++disc_pairs;
    }
    stats.terminal += r_terminal * inv_batch;
    auto l_ac = actor_critic_loss(tape, nets, emb, ro.steps, rewards, config.actor_critic);
    auto l_disc = ad::add_all(disc_terms);
    auto loss = ad::add(l_ac, l_disc);
    if (!std::isfinite(loss.item())) throw NumericError("non-finite reasoner loss");
    stats.disc_loss += l_disc.item();
    stats.loss += loss.item() * inv_batch;
    tape.backward(loss, inv_batch);
  }
  if (disc_pairs > 0) stats.disc_loss /= static_cast<double>(disc_pairs);
  if (!nets.store().all_finite()) throw NumericError("non-finite reasoner parameters");
  if (config.grad_clip > 0.0) nets.store().clip_grad_norm(config.grad_clip);
  adam.step();
  return stats;
}

void write_curve_csv(std::ostream& os, std::span<const EpochStats> curve) {
  os << "epoch,reward,disc_loss,recall1\n";
  for (const auto& e : curve) os << e.epoch << ',' << e.reward << ',' << e.disc_loss << ',' << e.recall1 << '\n';
}

double greedy_recall1(const PolicyNetworks& nets, const kg::KnowledgeGraph& kg, const kg::EmbeddingTable& emb,
                      std::span<const corpus::TrainingExample> examples, const SearchLimits& limits) {
  std::size_t hits = 0;
  std::size_t total = 0;
  for (const auto& ex : examples) {
    if (ex.gold_items.empty()) continue;
    ++total;
    auto start = episode_start(ex, emb);
    if (!start) continue;
    const auto ro = rollout(nets, kg, emb, *start, limits, RolloutMode::kGreedy);
    if (terminal_reward(ro.path, ex.gold_items) > 0.0) ++hits;
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

double discriminator_accuracy(const PolicyNetworks& nets, const kg::KnowledgeGraph& kg,
                              const kg::EmbeddingTable& emb, std::span<const corpus::TrainingExample> examples,
                              const SearchLimits& limits, Rng& rng, FakeSegments fakes) {
  std::size_t correct = 0;
  std::size_t total = 0;
  for (const auto& item : make_rec_items(examples, emb, limits)) {
    for (const auto& g : item.gold) {
      if (disc_path_score(nets, g.state, g.action) > 0.5) ++correct;
      ++total;
    }
    if (fakes == FakeSegments::kGoldStateRandomAction) {
      kg::ReasonPath prefix;
      prefix.entities.push_back(examples[item.example_index].gold_path->path.start());
      for (const auto& g : item.gold) {
        const auto space = action_space(kg, prefix, limits.action_cap, item.start.preference, emb);
        std::vector<Action> others;
        for (const auto& a : space.actions) {
          if (!(a == g.action)) others.push_back(a);
        }
        if (!others.empty()) {
          if (disc_path_score(nets, g.state, others[rng.index(others.size())]) < 0.5) ++correct;
          ++total;
        }
        prefix = extend(prefix, g.action);
      }
      continue;
    }
    kg::ReasonPath walk;
    walk.entities.push_back(item.start.start);
    for (std::size_t t = 0; !walk.terminal && walk.length() < limits.max_len; ++t) {
      const auto state = encode_state(item.start.preference, walk, limits.history, emb);
      const auto space = action_space(kg, walk, limits.action_cap, item.start.preference, emb);
      const Action a = space.actions[rng.index(space.size())];
      const bool is_gold = t < item.gold.size() && item.gold[t].action == a && item.gold[t].state == state;
      if (!is_gold) {
        if (disc_path_score(nets, state, a) < 0.5) ++correct;
        ++total;
      }
      walk = extend(walk, a);
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

std::vector<EpochStats> train_rec(PolicyNetworks& nets, const kg::KnowledgeGraph& kg, const kg::EmbeddingTable& emb,
                                  std::span<const corpus::TrainingExample> train,
                                  std::span<const corpus::TrainingExample> valid, const RecTrainConfig& config,
                                  const BridgeHooks* hooks, const EpochCallback& on_epoch) {
  auto items = make_rec_items(train, emb, config.limits);
  if (items.empty()) throw ConfigError("no training example has a gold path and a start entity");
  if (config.batch_size < 1 || config.epochs < 1) throw ConfigError("epochs and batch size must be positive");
  ad::AdamConfig ac;
  ac.learning_rate = config.learning_rate;
  ad::Adam adam(nets.store(), ac);
  Rng rng(config.seed);
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EpochStats> curve;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    EpochStats es;
    es.epoch = epoch;
    std::size_t batches = 0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(config.batch_size)) {
      std::vector<RecItem> batch;
      for (std::size_t k = b; k < std::min(order.size(), b + static_cast<std::size_t>(config.batch_size)); ++k) {
        batch.push_back(items[order[k]]);
      }
      const auto s = rec_update(nets, adam, kg, emb, batch, config, hooks, rng);
      es.reward += s.reward;
      es.disc_loss += s.disc_loss;
      es.terminal += s.terminal;
      ++batches;
    }
    es.reward /= static_cast<double>(batches);
    es.disc_loss /= static_cast<double>(batches);
    es.terminal /= static_cast<double>(batches);
    es.recall1 = greedy_recall1(nets, kg, emb, valid.empty() ? train : valid, config.limits);
    curve.push_back(es);
    if (on_epoch) on_epoch(es);
  }
  return curve;
}

}  // namespace dicr::reasoner
