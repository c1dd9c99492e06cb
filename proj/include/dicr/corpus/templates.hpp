#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "dicr/kg/knowledge_graph.hpp"
#include "dicr/kg/path.hpp"

namespace dicr::corpus {

// relation label -> template with {h} and {t} placeholders.
class RelationTemplates {
 public:
  RelationTemplates() = default;
  static RelationTemplates load_tsv(const std::string& path);
  void set(const std::string& relation, const std::string& pattern);

  // Explicit entry if present; otherwise "{h} is <words> {t} ." for
  // relations ending in "_by" and "{h} <words> {t} ." for the rest, where
  // <words> is the label with underscores replaced by spaces.
  std::string pattern_for(const std::string& relation) const;

 private:
  std::unordered_map<std::string, std::string> patterns_;
};

// One clause per hop, joined; tokens keep the label casing.
std::vector<std::string> tokenize_path(const kg::ReasonPath& path, const kg::KnowledgeGraph& kg,
                                       const RelationTemplates& templates = {});

// Clause for the single hop (head, relation, tail).
std::vector<std::string> tokenize_hop(kg::EntityId head, kg::RelationId relation, kg::EntityId tail,
                                      const kg::KnowledgeGraph& kg, const RelationTemplates& templates = {});

}  // namespace dicr::corpus
