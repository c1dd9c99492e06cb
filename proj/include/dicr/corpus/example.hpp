#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dicr/corpus/dialog.hpp"
#include "dicr/corpus/templates.hpp"

namespace dicr::corpus {

inline constexpr std::size_t kContextTurns = 5;
inline constexpr const char* kUserTag = "<usr>";
inline constexpr const char* kSystemTag = "<sys>";

struct GoldShiftPath {
  kg::ReasonPath path;
  // Tokenized statement U.
  std::vector<std::string> statement;
};

// One system turn Y with its preceding context C.
struct TrainingExample {
  std::string dialog_id;
  std::size_t turn_index = 0;
  std::vector<std::string> context;
  std::vector<std::string> response;
  // Canonical gold path: the first gold item that has one.
  std::optional<GoldShiftPath> gold_path;
  // One slot per gold item, empty when no path exists.
  std::vector<std::optional<GoldShiftPath>> item_paths;
  std::vector<EntityId> gold_items;
  // Distinct context entities in first-mention order.
  std::vector<EntityId> context_entities;
  // Most recently mentioned context entity, kNoEntity without mentions.
  EntityId last_mentioned = kg::kNoEntity;
  // Distinct entities mentioned in the response, in order.
  std::vector<EntityId> response_entities;
};

// Every system turn becomes an example.  The context is the last
// kContextTurns turns flattened with speaker tags.
std::vector<TrainingExample> build_examples(const std::vector<Dialog>& dialogs, const kg::KnowledgeGraph& kg,
                                            const RelationTemplates& templates = {}, int max_len = 3);

// Shortest path of 1..max_len hops from a context entity to `target`; ties
// go to the earliest-mentioned start, then the smallest (relation, entity)
// at each hop.
std::optional<kg::ReasonPath> shortest_gold_path(std::span<const EntityId> context_entities, EntityId target,
                                                  const kg::KnowledgeGraph& kg, int max_len = 3);

// Canonical gold path of the example (first gold item with a path).
std::optional<GoldShiftPath> extract_gold_path(const TrainingExample& example, const kg::KnowledgeGraph& kg,
                                               int max_len = 3, const RelationTemplates& templates = {});

}  // namespace dicr::corpus
