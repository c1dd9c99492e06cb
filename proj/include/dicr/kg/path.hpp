#pragma once

#include <vector>

#include "dicr/kg/knowledge_graph.hpp"

namespace dicr::kg {

// Alternating entity/relation walk e_0 -r_1-> e_1 ... -r_t-> e_t.
struct ReasonPath {
  std::vector<EntityId> entities;
  std::vector<RelationId> relations;
  // Cumulative log policy probability.
  double score = 0.0;
  bool terminal = false;

  std::size_t length() const { return relations.size(); }
  EntityId start() const { return entities.front(); }
  EntityId last() const { return entities.back(); }
  bool same_route(const ReasonPath& other) const {
    return entities == other.entities && relations == other.relations;
  }
};

// Every hop is a KG triplet and no entity repeats.
bool path_is_valid(const ReasonPath& path, const KnowledgeGraph& kg);

}  // namespace dicr::kg
