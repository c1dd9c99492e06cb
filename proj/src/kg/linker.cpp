#include "dicr/kg/linker.hpp"

#include <fstream>

#include "dicr/error.hpp"
#include "dicr/util/text.hpp"

namespace dicr::kg {
namespace {

std::vector<std::string> surface_tokens(const std::string& label) {
  std::vector<std::string> out;
  for (const auto& w : text::split_words(label)) {
    auto n = text::normalize_token(w);
    if (!n.empty()) out.push_back(std::move(n));
  }
  return out;
}

}  // namespace

AliasTable load_alias_tsv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open alias file " + path);
  AliasTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    auto fields = text::split(line, '\t');
    if (fields.size() != 2) throw ParseError("expected alias<TAB>entity-label", lineno);
    table.emplace(std::move(fields[0]), std::move(fields[1]));
  }
  return table;
}

EntityLinker::EntityLinker(const KnowledgeGraph& kg, const AliasTable* aliases) {
  for (EntityId e = 0; e < kg.num_entities(); ++e) add_surface(kg.entity_label(e), e);
  if (aliases != nullptr) {
    for (const auto& [alias, label] : *aliases) {
      if (auto id = kg.find_entity(label)) add_surface(alias, *id);
    }
  }
}

void EntityLinker::add_surface(const std::string& surface, EntityId id) {
  const auto toks = surface_tokens(surface);
  if (toks.empty()) return;
  // First registration wins on collisions.
  surfaces_.try_emplace(text::join(toks), id);
  max_tokens_ = std::max(max_tokens_, toks.size());
}

std::vector<Mention> EntityLinker::link(std::span<const std::string> tokens) const {
  std::vector<std::string> norm;
  norm.reserve(tokens.size());
  for (const auto& t : tokens) norm.push_back(text::normalize_token(t));

  std::vector<Mention> out;
  std::size_t i = 0;
  while (i < norm.size()) {
    bool matched = false;
    if (!norm[i].empty()) {
      const std::size_t longest = std::min(max_tokens_, norm.size() - i);
      for (std::size_t len = longest; len >= 1 && !matched; --len) {
        bool contiguous = true;
        std::string key;
        for (std::size_t k = 0; k < len; ++k) {
          if (norm[i + k].empty()) {
            contiguous = false;
            break;
          }
          if (k > 0) key.push_back(' ');
          key += norm[i + k];
        }
        if (!contiguous) continue;
        auto it = surfaces_.find(key);
        if (it == surfaces_.end()) continue;
        std::vector<std::string> surface(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                         tokens.begin() + static_cast<std::ptrdiff_t>(i + len));
        out.push_back(Mention{i, i + len, it->second, text::join(surface)});
        i += len;
        matched = true;
      }
    }
    if (!matched) ++i;
  }
  return out;
}

}  // namespace dicr::kg
