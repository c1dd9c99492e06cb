#include "dicr/kg/path.hpp"

#include <algorithm>

namespace dicr::kg {

bool path_is_valid(const ReasonPath& path, const KnowledgeGraph& kg) {
  if (path.entities.empty() || path.entities.size() != path.relations.size() + 1) return false;
  for (EntityId e : path.entities) {
    if (!kg.valid_entity(e)) return false;
  }
  for (std::size_t i = 0; i < path.relations.size(); ++i) {
    if (!kg.has_triplet(path.entities[i], path.relations[i], path.entities[i + 1])) return false;
  }
  auto sorted = path.entities;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

}  // namespace dicr::kg
