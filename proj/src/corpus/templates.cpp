#include "dicr/corpus/templates.hpp"

#include <fstream>

#include "dicr/error.hpp"
#include "dicr/util/text.hpp"

namespace dicr::corpus {

RelationTemplates RelationTemplates::load_tsv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open relation template file " + path);
  RelationTemplates out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(line, '\t');
    if (fields.size() != 2) throw ParseError("expected relation<TAB>template", lineno);
    if (fields[1].find("{h}") == std::string::npos || fields[1].find("{t}") == std::string::npos) {
      throw ParseError("template must contain {h} and {t}", lineno);
    }
    out.set(std::string(text::trim(fields[0])), std::string(text::trim(fields[1])));
  }
  return out;
}

void RelationTemplates::set(const std::string& relation, const std::string& pattern) {
  patterns_[relation] = pattern;
}

std::string RelationTemplates::pattern_for(const std::string& relation) const {
  if (auto it = patterns_.find(relation); it != patterns_.end()) return it->second;
  std::string words = relation;
  for (char& c : words) {
    if (c == '_') c = ' ';
  }
  words = std::string(text::trim(words));
  const bool passive = relation.size() > 3 && relation.ends_with("_by");
  return passive ? "{h} is " + words + " {t} ." : "{h} " + words + " {t} .";
}

std::vector<std::string> tokenize_hop(kg::EntityId head, kg::RelationId relation, kg::EntityId tail,
                                      const kg::KnowledgeGraph& kg, const RelationTemplates& templates) {
  const auto pattern = templates.pattern_for(kg.relation_label(relation));
  std::vector<std::string> out;
  for (const auto& piece : text::split_words(pattern)) {
    if (piece == "{h}" || piece == "{t}") {
      const auto label = text::split_words(kg.entity_label(piece == "{h}" ? head : tail));
      out.insert(out.end(), label.begin(), label.end());
    } else {
      out.push_back(piece);
    }
  }
  return out;
}

std::vector<std::string> tokenize_path(const kg::ReasonPath& path, const kg::KnowledgeGraph& kg,
                                       const RelationTemplates& templates) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < path.relations.size(); ++i) {
    auto clause = tokenize_hop(path.entities[i], path.relations[i], path.entities[i + 1], kg, templates);
    out.insert(out.end(), clause.begin(), clause.end());
  }
  return out;
}

}  // namespace dicr::corpus
