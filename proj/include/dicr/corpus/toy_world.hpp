#pragma once

#include <cstdint>
#include <vector>

#include "dicr/corpus/dialog.hpp"

namespace dicr::corpus {

struct ToyWorld {
  kg::KnowledgeGraph kg;
  std::vector<Dialog> dialogs;
};

struct ToyWorldConfig {
  std::uint64_t seed = 7;
  int n_entities = 200;
  int n_relations = 5;
  int n_dialogs = 500;
  // Extra random edges per entity besides the two planted relations.
  int random_edges = 2;
};

// Random KG in which relations 0 and 1 are functional and planted on every
// entity.  Each two-turn dialog mentions a start entity s (sometimes after a
// distractor); the system recommends the unique t = r1(r0(s)) and spells the
// path out.  Relation ids 0 and 1 are the planted pair.
ToyWorld generate_toy_world(const ToyWorldConfig& config);
ToyWorld generate_toy_world(std::uint64_t seed, int n_entities, int n_relations, int n_dialogs);

}  // namespace dicr::corpus
