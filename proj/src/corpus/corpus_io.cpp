#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "dicr/corpus/dialog.hpp"
#include "dicr/error.hpp"
#include "dicr/util/text.hpp"

namespace dicr::corpus {
namespace {

using nlohmann::json;

[[noreturn]] void schema_error(std::size_t line, const std::string& dialog_id, const std::string& field,
                               const std::string& what) {
  throw ParseError("dialog '" + dialog_id + "' field '" + field + "': " + what, line);
}

const json& require(const json& obj, const char* key, std::size_t line, const std::string& dialog_id) {
  if (!obj.is_object() || !obj.contains(key)) schema_error(line, dialog_id, key, "missing");
  return obj.at(key);
}

}  // namespace

LoadedCorpus parse_corpus(std::istream& is, const kg::KnowledgeGraph& kg) {
  LoadedCorpus out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
    }
    std::string dialog_id = "?";
    const auto& id_field = require(doc, "dialog_id", lineno, dialog_id);
    if (!id_field.is_string()) schema_error(lineno, dialog_id, "dialog_id", "must be a string");
    dialog_id = id_field.get<std::string>();

    const auto& turns = require(doc, "turns", lineno, dialog_id);
    if (!turns.is_array() || turns.empty()) schema_error(lineno, dialog_id, "turns", "must be a non-empty array");

    Dialog dialog;
    dialog.id = dialog_id;
    for (std::size_t ti = 0; ti < turns.size(); ++ti) {
      const auto& jt = turns[ti];
      const std::string where = "turns[" + std::to_string(ti) + "]";
      Turn turn;
      const auto& speaker = require(jt, "speaker", lineno, dialog_id);
      if (speaker == "user") {
        turn.speaker = Speaker::kUser;
      } else if (speaker == "system") {
        turn.speaker = Speaker::kSystem;
      } else {
        schema_error(lineno, dialog_id, where + ".speaker", "must be \"user\" or \"system\"");
      }
      const Speaker expected = ti % 2 == 0 ? Speaker::kUser : Speaker::kSystem;
      if (turn.speaker != expected) {
        schema_error(lineno, dialog_id, where + ".speaker", "turns must alternate starting with user");
      }
      const auto& txt = require(jt, "text", lineno, dialog_id);
      if (!txt.is_string()) schema_error(lineno, dialog_id, where + ".text", "must be a string");
      turn.tokens = text::tokenize(txt.get<std::string>());

      if (jt.contains("entities")) {
        const auto& ents = jt.at("entities");
        if (!ents.is_array()) schema_error(lineno, dialog_id, where + ".entities", "must be an array");
        for (const auto& je : ents) {
          if (!je.is_object() || !je.contains("span") || !je.contains("id") || !je.at("span").is_array() ||
              je.at("span").size() != 2 || !je.at("id").is_string()) {
            schema_error(lineno, dialog_id, where + ".entities", "expected {\"span\": [start, end], \"id\": str}");
          }
          const auto b = je.at("span")[0].get<long long>();
          const auto e = je.at("span")[1].get<long long>();
          if (b < 0 || e <= b || static_cast<std::size_t>(e) > turn.tokens.size()) {
            schema_error(lineno, dialog_id, where + ".entities.span", "span outside the tokenized text");
          }
          const auto label = je.at("id").get<std::string>();
          auto id = kg.find_entity(label);
          if (!id) {
            ++out.dropped_mentions;
            continue;
          }
          std::vector<std::string> surface(turn.tokens.begin() + b, turn.tokens.begin() + e);
          turn.mentions.push_back(kg::Mention{static_cast<std::size_t>(b), static_cast<std::size_t>(e), *id,
                                              text::join(surface)});
        }
      }
      if (jt.contains("items")) {
        const auto& items = jt.at("items");
        if (!items.is_array()) schema_error(lineno, dialog_id, where + ".items", "must be an array");
        if (!items.empty() && turn.speaker != Speaker::kSystem) {
          schema_error(lineno, dialog_id, where + ".items", "only system turns recommend items");
        }
        for (const auto& ji : items) {
          if (!ji.is_string()) schema_error(lineno, dialog_id, where + ".items", "item ids must be strings");
          auto id = kg.find_entity(ji.get<std::string>());
          if (!id) {
            ++out.dropped_items;
            continue;
          }
          const bool mentioned = std::any_of(turn.mentions.begin(), turn.mentions.end(),
                                             [&](const kg::Mention& m) { return m.entity == *id; });
          if (!mentioned) {
            schema_error(lineno, dialog_id, where + ".items", "item '" + ji.get<std::string>() +
                                                                  "' is not mentioned in the turn");
          }
          turn.items.push_back(*id);
        }
      }
      dialog.turns.push_back(std::move(turn));
    }
    out.dialogs.push_back(std::move(dialog));
  }
  return out;
}

LoadedCorpus load_corpus(const std::string& path, const kg::KnowledgeGraph& kg) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open corpus file " + path);
  return parse_corpus(is, kg);
}

void write_corpus(std::ostream& os, const std::vector<Dialog>& dialogs, const kg::KnowledgeGraph& kg) {
  for (const auto& d : dialogs) {
    json doc;
    doc["dialog_id"] = d.id;
    doc["turns"] = json::array();
    for (const auto& t : d.turns) {
      json jt;
      jt["speaker"] = t.speaker == Speaker::kUser ? "user" : "system";
      jt["text"] = text::join(t.tokens);
      jt["entities"] = json::array();
      for (const auto& m : t.mentions) {
        jt["entities"].push_back({{"span", {m.begin, m.end}}, {"id", kg.entity_label(m.entity)}});
      }
      jt["items"] = json::array();
      for (EntityId item : t.items) jt["items"].push_back(kg.entity_label(item));
      doc["turns"].push_back(std::move(jt));
    }
    os << doc.dump() << '\n';
  }
}

void save_corpus(const std::string& path, const std::vector<Dialog>& dialogs, const kg::KnowledgeGraph& kg) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  write_corpus(os, dialogs, kg);
}

}  // namespace dicr::corpus
