#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dicr/corpus/example.hpp"
#include "dicr/corpus/toy_world.hpp"
#include "dicr/error.hpp"
#include "dicr/reasoner/networks.hpp"
#include "dicr/reasoner/search.hpp"
#include "dicr/reasoner/training.hpp"
#include "support/grad_check.hpp"
#include "support/oracles.hpp"

using namespace dicr;
using namespace dicr::reasoner;

namespace {

struct Small {
  corpus::ToyWorld world;
  kg::EmbeddingTable emb;
  PolicyNetworks nets;
  std::vector<corpus::TrainingExample> examples;
};

Small make_small(std::uint64_t seed, int dim = 4, int hidden = 6) {
  auto world = corpus::generate_toy_world(seed, 24, 3, 50);
  kg::EmbeddingTable emb(dim, world.kg.num_entities(), world.kg.num_relations());
  Rng rng(seed + 1);
  for (kg::EntityId e = 0; e < emb.num_entities(); ++e) {
    for (auto& v : emb.mutable_entity(e)) v = rng.uniform(-1.0, 1.0);
  }
  for (kg::RelationId r = 0; r < emb.num_relations(); ++r) {
    for (auto& v : emb.mutable_relation(r)) v = rng.uniform(-1.0, 1.0);
  }
  NetworkShape shape;
  shape.dim = dim;
  shape.actor_hidden = hidden;
  shape.critic_hidden = hidden;
  shape.disc_hidden = hidden;
  shape.num_entities = world.kg.num_entities();
  shape.num_relations = world.kg.num_relations();
  PolicyNetworks nets(shape);
  nets.init(rng);
  auto examples = corpus::build_examples(world.dialogs, world.kg);
  return Small{std::move(world), std::move(emb), std::move(nets), std::move(examples)};
}

EpisodeStart start_at(kg::EntityId e, const kg::EmbeddingTable& emb) {
  EpisodeStart s;
  s.start = e;
  const auto row = emb.entity(e);
  s.preference.assign(row.begin(), row.end());
  return s;
}

bool is_actor(const std::string& n) { return n.rfind("actor", 0) == 0; }
bool is_critic(const std::string& n) { return n.rfind("critic", 0) == 0; }
bool is_disc(const std::string& n) { return n.rfind("disc", 0) == 0; }

}  // namespace

TEST_CASE("reward arithmetic") {
  RewardBundle b;
  b.terminal = 1.0;
  b.path = 2.0;
  b.knowledge = 3.0;
  b.semantic = 4.0;
  b.weights = {0.1, 0.2, 0.3};
  CHECK(aggregate_reward(b, 3, 3) == doctest::Approx(0.1 * 2 + 0.2 * 3 + 0.3 * 4 + 0.4 * 1));
  // Short path: the knowledge weight is dropped and its share goes to R_T.
  CHECK(aggregate_reward(b, 2, 3) == doctest::Approx(0.1 * 2 + 0.3 * 4 + 0.6 * 1));
  CHECK(aggregate_reward_pre_joint(2.0, 1.0, 0.25) == doctest::Approx(0.5 + 0.75));
  b.weights = {0.5, 0.4, 0.3};
  CHECK_THROWS_AS(aggregate_reward(b, 3, 3), ConfigError);
  CHECK(path_reward(0.5) == doctest::Approx(0.0));
  CHECK(path_reward(0.9) == doctest::Approx(std::log(9.0)));
  CHECK(disc_loss(0.5, 0.5) == doctest::Approx(2.0 * std::log(2.0)));
}

TEST_CASE("paper reward weights with beta = gamma = 0 reduce to the pre-joint reward exactly") {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    RewardBundle b;
    b.terminal = rng.bernoulli(0.5) ? 1.0 : 0.0;
    b.path = rng.uniform(-10.0, 10.0);
    b.knowledge = rng.uniform(-10.0, 10.0);
    b.semantic = rng.uniform(-10.0, 10.0);
    b.weights = {0.006, 0.0, 0.0};
    CHECK(aggregate_reward(b, 3, 3) == aggregate_reward_pre_joint(b.path, b.terminal, 0.006));
  }
}

TEST_CASE("terminal reward needs a terminal path ending on a gold item") {
  kg::ReasonPath p;
  p.entities = {0, 1};
  p.relations = {0};
  const std::vector<kg::EntityId> gold = {1};
  CHECK(terminal_reward(p, gold) == 0.0);
  p.terminal = true;
  CHECK(terminal_reward(p, gold) == 1.0);
  CHECK(terminal_reward(p, std::vector<kg::EntityId>{2}) == 0.0);
}

TEST_CASE("state encoding layout") {
  kg::EmbeddingTable emb(2, 3, 1);
  emb.mutable_entity(0)[0] = 1.0;
  emb.mutable_entity(1)[0] = 2.0;
  emb.mutable_relation(0)[1] = 3.0;
  const std::vector<double> u = {9.0, 9.0};
  kg::ReasonPath p;
  p.entities = {0};
  // u, e_{t-1} (pad), r_t (pad), e_t
  CHECK(encode_state(u, p, 1, emb) == std::vector<double>{9, 9, 0, 0, 0, 0, 1, 0});
  p.entities = {0, 1};
  p.relations = {0};
  CHECK(encode_state(u, p, 1, emb) == std::vector<double>{9, 9, 1, 0, 0, 3, 2, 0});
}

TEST_CASE("episode start uses the last mentioned entity and the context mean") {
  auto s = make_small(4);
  const auto& ex = s.examples.front();
  const auto st = episode_start(ex, s.emb);
  REQUIRE(st.has_value());
  CHECK(st->start == ex.last_mentioned);
  corpus::TrainingExample none = ex;
  none.context_entities.clear();
  none.last_mentioned = kg::kNoEntity;
  CHECK_FALSE(episode_start(none, s.emb).has_value());
}

TEST_CASE("beam width 1 is the greedy rollout") {
  auto s = make_small(5);
  const SearchLimits lim;
  for (kg::EntityId e = 0; e < 10; ++e) {
    const auto st = start_at(e, s.emb);
    const auto greedy = rollout(s.nets, s.world.kg, s.emb, st, lim, RolloutMode::kGreedy);
    const auto beam = beam_search(s.nets, s.world.kg, s.emb, st, lim, 1, 1);
    REQUIRE(beam.size() == 1);
    CHECK(beam[0].same_route(greedy.path));
  }
}

TEST_CASE("ranked items keep first occurrences") {
  std::vector<kg::ReasonPath> paths(3);
  paths[0].entities = {0, 4};
  paths[1].entities = {0, 2};
  paths[2].entities = {0, 5, 4};
  CHECK(ranked_items(paths) == std::vector<kg::EntityId>{4, 2});
}

TEST_SUITE("invariants") {
  TEST_CASE("policy distributions are normalized and discriminator scores clamped") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto s = make_small(seed);
      Rng rng(seed);
      for (int trial = 0; trial < 40; ++trial) {
        const auto st = start_at(static_cast<kg::EntityId>(rng.index(24)), s.emb);
        const auto ro = rollout(s.nets, s.world.kg, s.emb, st, SearchLimits{}, RolloutMode::kSample, &rng);
        for (const auto& step : ro.steps) {
          const auto pi = policy_forward(s.nets, step.state, step.space, s.emb);
          double total = 0.0;
          for (double p : pi) {
            CHECK(p >= 0.0);
            total += p;
          }
          CHECK(std::abs(total - 1.0) <= 1e-6);
          for (const auto& a : step.space.actions) {
            const double d = disc_path_score(s.nets, step.state, a);
            CHECK(d >= kDiscEpsilon);
            CHECK(d <= 1.0 - kDiscEpsilon);
          }
        }
      }
    }
  }

  TEST_CASE("action spaces respect the cap, exclude visited entities and end with the self-loop") {
    Rng rng(6);
    std::vector<kg::TripletRecord> recs;
    for (int i = 0; i < 300; ++i) {
      recs.push_back({"e" + std::to_string(rng.index(30)), "r" + std::to_string(rng.index(4)),
                      "e" + std::to_string(rng.index(30)), static_cast<std::size_t>(i + 1)});
    }
    const auto kg = kg::KnowledgeGraph::from_records(recs);
    kg::EmbeddingTable emb(3, kg.num_entities(), kg.num_relations());
    for (kg::EntityId e = 0; e < kg.num_entities(); ++e) {
      for (auto& v : emb.mutable_entity(e)) v = rng.uniform(-1.0, 1.0);
    }
    for (int trial = 0; trial < 200; ++trial) {
      kg::ReasonPath p;
      p.entities.push_back(static_cast<kg::EntityId>(rng.index(static_cast<std::size_t>(kg.num_entities()))));
      for (std::size_t hop = 0, n = rng.index(3); hop < n; ++hop) {
        const auto out = kg.outgoing(p.last());
        if (out.empty()) break;
        const auto& edge = out[rng.index(out.size())];
        if (std::find(p.entities.begin(), p.entities.end(), edge.entity) != p.entities.end()) break;
        p.entities.push_back(edge.entity);
        p.relations.push_back(edge.relation);
      }
      const std::size_t cap = 2 + rng.index(12);
      const auto u = emb.entity(p.start());
      const auto space = action_space(kg, p, cap, u, emb);
      CHECK(space.size() >= 1);
      CHECK(space.size() <= cap);
      CHECK(space.actions.back().is_self_loop());
      for (std::size_t i = 0; i + 1 < space.size(); ++i) {
        const auto& a = space.actions[i];
        CHECK_FALSE(a.is_self_loop());
        CHECK(kg.has_triplet(p.last(), a.relation, a.entity));
        CHECK(std::find(p.entities.begin(), p.entities.end(), a.entity) == p.entities.end());
      }
    }
  }

  TEST_CASE("beam paths are valid, distinct and sorted, and the best equals the exhaustive argmax") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      auto s = make_small(seed);
      const SearchLimits lim;
      for (kg::EntityId e = 0; e < 24; e += 3) {
        const auto st = start_at(e, s.emb);
        const auto beam = beam_search(s.nets, s.world.kg, s.emb, st, lim, 25, 25);
        REQUIRE(!beam.empty());
        for (std::size_t i = 0; i < beam.size(); ++i) {
          CHECK(beam[i].start() == e);
          CHECK(kg::path_is_valid(beam[i], s.world.kg));
          CHECK(beam[i].length() <= lim.max_len);
          if (i > 0) CHECK(beam[i - 1].score >= beam[i].score);
          for (std::size_t j = 0; j < i; ++j) CHECK_FALSE(beam[i].same_route(beam[j]));
        }
        const auto all = oracle::enumerate_paths(s.nets, s.world.kg, s.emb, e, st.preference, lim.max_len,
                                                 lim.action_cap, lim.history);
        const auto best = std::max_element(all.begin(), all.end(), [](const auto& a, const auto& b) {
          return a.score < b.score;
        });
        CHECK(beam[0].same_route(*best));
        CHECK(beam[0].score == doctest::Approx(best->score).epsilon(1e-9));
        double mass = 0.0;
        for (const auto& p : all) mass += std::exp(p.score);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
}

TEST_SUITE("gradients") {
  TEST_CASE("discriminator loss") {
    auto s = make_small(7);
    Rng rng(7);
    const auto st = start_at(3, s.emb);
    const auto ro = rollout(s.nets, s.world.kg, s.emb, st, SearchLimits{}, RolloutMode::kSample, &rng);
    REQUIRE(!ro.steps.empty());
    const auto& step = ro.steps.front();
    const Action fake = step.space.actions[static_cast<std::size_t>(step.chosen)];
    const Action real = step.space.actions.back();
    const auto r = testing::grad_check(
        s.nets.store(),
        [&](ad::Tape& t) {
          auto state = t.constant(step.state);
          return disc_loss(disc_score(t, s.nets, state, fake), disc_score(t, s.nets, state, real));
        },
        is_disc, 1e-5);
    INFO(r.worst);
    CHECK(r.checked > 0);
    CHECK(r.max_rel_error < 1e-4);
  }

  TEST_CASE("actor-critic loss with full gradients") {
    auto s = make_small(8);
    Rng rng(8);
    Rollout ro;
    for (int tries = 0; tries < 50 && ro.steps.size() < 2; ++tries) {
      ro = rollout(s.nets, s.world.kg, s.emb, start_at(static_cast<kg::EntityId>(rng.index(24)), s.emb),
                   SearchLimits{}, RolloutMode::kSample, &rng);
    }
    REQUIRE(ro.steps.size() >= 2);
    std::vector<double> rewards(ro.steps.size());
    for (auto& r : rewards) r = rng.uniform(-1.0, 1.0);
    ActorCriticOptions opt;
    opt.entropy_weight = 0.1;
    opt.critic_through_actor_term = true;
    opt.bootstrap_gradient = true;
    const auto r = testing::grad_check(
        s.nets.store(),
        [&](ad::Tape& t) { return actor_critic_loss(t, s.nets, s.emb, ro.steps, rewards, opt); },
        [](const std::string& n) { return is_actor(n) || is_critic(n); }, 1e-5);
    INFO(r.worst);
    CHECK(r.checked > 0);
    CHECK(r.max_rel_error < 1e-4);
  }

  TEST_CASE("semi-gradient actor-critic keeps the critic out of the actor term") {
    auto s = make_small(9);
    Rng rng(9);
    const auto ro = rollout(s.nets, s.world.kg, s.emb, start_at(2, s.emb), SearchLimits{}, RolloutMode::kSample, &rng);
    const std::vector<double> rewards(ro.steps.size(), 0.0);
    // With the TD target pinned to the critic's own prediction the only
    // critic gradient could come from the actor term.
    ActorCriticOptions opt;
    opt.entropy_weight = 0.0;
    s.nets.store().zero_grad();
    {
      ad::Tape t;
      std::vector<ad::Var> terms;
      for (const auto& step : ro.steps) {
        auto state = t.constant(step.state);
        auto pi = ad::softmax(policy_logits(t, s.nets, state, step.space, s.emb));
        auto q = critic_values(t, s.nets, state, step.space);
        terms.push_back(ad::neg(ad::dot(pi, ad::detach(q))));
      }
      t.backward(ad::add_all(terms));
    }
    double critic_norm = 0.0;
    for (std::size_t i = 0; i < s.nets.store().size(); ++i) {
      const auto& p = s.nets.store().at(i);
      if (!is_critic(p.name())) continue;
      for (double g : p.grad()) critic_norm += g * g;
    }
    CHECK(critic_norm == 0.0);
    s.nets.store().zero_grad();
  }
}
