#pragma once

#include <span>
#include <vector>

#include "dicr/kg/embedding.hpp"

namespace dicr::kg {

struct UserPreference {
  std::vector<double> vector;
  std::vector<EntityId> source_entities;
};

// Mean of the source entities' embedding rows.  Throws PreconditionError on
// an empty list; pass {kNoEntity} for the empty-context fallback.
UserPreference user_preference(std::span<const EntityId> context_entities, const EmbeddingTable& table);

}  // namespace dicr::kg
