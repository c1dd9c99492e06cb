#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dicr/kg/knowledge_graph.hpp"
#include "dicr/kg/linker.hpp"
#include "dicr/kg/path.hpp"

namespace dicr::corpus {

using kg::EntityId;

enum class Speaker { kUser, kSystem };

struct Turn {
  Speaker speaker = Speaker::kUser;
  std::vector<std::string> tokens;
  std::vector<kg::Mention> mentions;
  // Recommended entities; only on system turns.
  std::vector<EntityId> items;
  bool operator==(const Turn&) const = default;
};

struct Dialog {
  std::string id;
  std::vector<Turn> turns;
  bool operator==(const Dialog&) const = default;
};

struct LoadedCorpus {
  std::vector<Dialog> dialogs;
  // Mentions or items whose id is not a KG entity.
  std::size_t dropped_mentions = 0;
  std::size_t dropped_items = 0;
};

// JSONL, one dialog per line:
// {"dialog_id": str, "turns": [{"speaker": "user"|"system", "text": str,
//   "entities": [{"span": [start, end], "id": str}], "items": [str]}]}
// Spans are token offsets into the tokenized text, end exclusive; ids are
// entity labels.
LoadedCorpus parse_corpus(std::istream& is, const kg::KnowledgeGraph& kg);
LoadedCorpus load_corpus(const std::string& path, const kg::KnowledgeGraph& kg);
void write_corpus(std::ostream& os, const std::vector<Dialog>& dialogs, const kg::KnowledgeGraph& kg);
void save_corpus(const std::string& path, const std::vector<Dialog>& dialogs, const kg::KnowledgeGraph& kg);

}  // namespace dicr::corpus
