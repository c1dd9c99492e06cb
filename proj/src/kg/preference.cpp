#include "dicr/kg/preference.hpp"

#include "dicr/error.hpp"

namespace dicr::kg {

UserPreference user_preference(std::span<const EntityId> context_entities, const EmbeddingTable& table) {
  if (context_entities.empty()) {
    throw PreconditionError("user preference needs at least one context entity");
  }
  UserPreference pref;
  pref.vector.assign(static_cast<std::size_t>(table.dim()), 0.0);
  for (EntityId e : context_entities) {
    const auto row = table.entity(e);
    for (std::size_t i = 0; i < row.size(); ++i) pref.vector[i] += row[i];
  }
  const double inv = 1.0 / static_cast<double>(context_entities.size());
  for (double& v : pref.vector) v *= inv;
  pref.source_entities.assign(context_entities.begin(), context_entities.end());
  return pref;
}

}  // namespace dicr::kg
