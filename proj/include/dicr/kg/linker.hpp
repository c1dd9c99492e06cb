#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dicr/kg/knowledge_graph.hpp"

namespace dicr::kg {

// Token span [begin, end) of a mention.
struct Mention {
  std::size_t begin = 0;
  std::size_t end = 0;
  EntityId entity = kNoEntity;
  std::string text;
  bool operator==(const Mention&) const = default;
};

// alias -> entity label
using AliasTable = std::unordered_map<std::string, std::string>;
AliasTable load_alias_tsv(const std::string& path);

// Case-folded, punctuation-stripped exact matching of entity labels and
// aliases; leftmost-longest, non-overlapping.
class EntityLinker {
 public:
  explicit EntityLinker(const KnowledgeGraph& kg, const AliasTable* aliases = nullptr);

  std::vector<Mention> link(std::span<const std::string> tokens) const;

 private:
  void add_surface(const std::string& surface, EntityId id);

  std::unordered_map<std::string, EntityId> surfaces_;
  std::size_t max_tokens_ = 0;
};

}  // namespace dicr::kg
