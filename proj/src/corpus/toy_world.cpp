#include "dicr/corpus/toy_world.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "dicr/corpus/example.hpp"
#include "dicr/corpus/templates.hpp"
#include "dicr/error.hpp"
#include "dicr/util/rng.hpp"
#include "dicr/util/text.hpp"

namespace dicr::corpus {
namespace {

const std::vector<std::string>& relation_pool() {
  static const std::vector<std::string> kPool = {"directed_by", "written_by", "starring", "has_genre",
                                                 "produced_by", "based_on",   "composed_by", "released_in"};
  return kPool;
}

std::string relation_name(int r) {
  const auto& pool = relation_pool();
  if (r < static_cast<int>(pool.size())) return pool[static_cast<std::size_t>(r)];
  return "related_to_" + std::to_string(r);
}

std::string entity_name(int e, int n) {
  int width = 3;
  for (int x = n - 1; x >= 1000; x /= 10) ++width;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "e%0*d", width, e);
  return buf;
}

Turn make_turn(Speaker speaker, std::vector<std::string> tokens, const kg::KnowledgeGraph& kg) {
  Turn t;
  t.speaker = speaker;
  t.tokens = std::move(tokens);
  for (std::size_t i = 0; i < t.tokens.size(); ++i) {
    if (auto id = kg.find_entity(t.tokens[i])) t.mentions.push_back(kg::Mention{i, i + 1, *id, t.tokens[i]});
  }
  return t;
}

}  // namespace

ToyWorld generate_toy_world(std::uint64_t seed, int n_entities, int n_relations, int n_dialogs) {
  ToyWorldConfig c;
  c.seed = seed;
  c.n_entities = n_entities;
  c.n_relations = n_relations;
  c.n_dialogs = n_dialogs;
  return generate_toy_world(c);
}

ToyWorld generate_toy_world(const ToyWorldConfig& config) {
  const int n = config.n_entities;
  if (n < 20 || config.n_relations < 3 || config.n_dialogs < 50) {
    throw GenerationError("toy world needs >= 20 entities, >= 3 relations and >= 50 dialogs");
  }
  if (config.random_edges < 0 || config.random_edges > n - 3) {
    throw GenerationError("random_edges out of range");
  }
  Rng rng(config.seed);

  // Planted functional relations first so they receive relation ids 0 and 1.
  struct Raw {
    int h, r, t;
  };
  std::vector<Raw> raw;
  std::vector<int> ra(static_cast<std::size_t>(n)), rb(static_cast<std::size_t>(n));
  for (int e = 0; e < n; ++e) {
    int a, b;
    do {
      a = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
    } while (a == e);
    do {
      b = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
    } while (b == e || b == a);
    ra[static_cast<std::size_t>(e)] = a;
    rb[static_cast<std::size_t>(e)] = b;
    raw.push_back({e, 0, a});
    raw.push_back({e, 1, b});
    std::set<int> used{a, b, e};
    for (int k = 0; k < config.random_edges; ++k) {
      int t;
      do {
        t = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
      } while (used.contains(t));
      used.insert(t);
      const int r = 2 + static_cast<int>(rng.index(static_cast<std::size_t>(config.n_relations - 2)));
      raw.push_back({e, r, t});
    }
  }
  std::vector<kg::TripletRecord> records;
  records.reserve(raw.size());
  for (const auto& x : raw) {
    records.push_back({entity_name(x.h, n), relation_name(x.r), entity_name(x.t, n), records.size() + 1});
  }
  ToyWorld world{kg::KnowledgeGraph::from_records(records), {}};
  const auto& kg = world.kg;
  auto id_of = [&](int e) { return *kg.find_entity(entity_name(e, n)); };

  const RelationTemplates templates;
  int failures = 0;
  while (static_cast<int>(world.dialogs.size()) < config.n_dialogs) {
    if (failures > 50 * config.n_dialogs) {
      throw GenerationError("could not plant enough unique two-hop targets");
    }
    const int s = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
    const int m = ra[static_cast<std::size_t>(s)];
    const int t = rb[static_cast<std::size_t>(m)];
    const bool with_distractor = rng.bernoulli(0.5);
    int d = -1;
    if (with_distractor) {
      do {
        d = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
      } while (d == s || d == m || d == t);
    }
    if (t == s) {
      ++failures;
      continue;
    }
    kg::ReasonPath planted;
    planted.entities = {id_of(s), id_of(m), id_of(t)};
    planted.relations = {0, 1};
    std::vector<EntityId> context;
    if (d >= 0) context.push_back(id_of(d));
    context.push_back(id_of(s));
    // The extractor must recover exactly the planted route.
    auto gold = shortest_gold_path(context, id_of(t), kg, 3);
    if (!gold || !gold->same_route(planted)) {
      ++failures;
      continue;
    }

    std::vector<std::string> user;
    if (d >= 0) {
      user = {"i", "watched", entity_name(d, n), "but", "i", "like", entity_name(s, n), "."};
    } else {
      user = {"i", "like", entity_name(s, n), "."};
    }
    std::vector<std::string> system = {"you", "might", "like", entity_name(t, n), "."};
    for (const auto& tok : tokenize_path(planted, kg, templates)) system.push_back(text::casefold(tok));

    Dialog dialog;
    char id[32];
    std::snprintf(id, sizeof(id), "toy-%05zu", world.dialogs.size());
    dialog.id = id;
    dialog.turns.push_back(make_turn(Speaker::kUser, std::move(user), kg));
    dialog.turns.push_back(make_turn(Speaker::kSystem, std::move(system), kg));
    dialog.turns.back().items = {id_of(t)};
    world.dialogs.push_back(std::move(dialog));
  }
  return world;
}

}  // namespace dicr::corpus
