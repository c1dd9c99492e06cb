#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dicr/eval/metrics.hpp"
#include "dicr/kg/knowledge_graph.hpp"
#include "dicr/util/text.hpp"

namespace dicr::testing {

struct MetricsFixture {
  kg::KnowledgeGraph kg;
  std::vector<eval::EvalRecord> records;
  std::map<std::string, double> expected;
};

inline std::string fixture_path(const std::string& name) { return std::string(DICR_FIXTURE_DIR) + "/" + name; }

inline MetricsFixture load_metrics_fixture() {
  std::ifstream is(fixture_path("metrics_fixture.json"));
  const auto j = nlohmann::json::parse(is);
  MetricsFixture f;
  std::vector<kg::TripletRecord> triplets;
  for (const auto& t : j.at("triplets")) {
    triplets.push_back({t.at(0).get<std::string>(), t.at(1).get<std::string>(), t.at(2).get<std::string>(),
                        triplets.size() + 1});
  }
  f.kg = kg::KnowledgeGraph::from_records(triplets);
  auto ids = [&](const nlohmann::json& labels) {
    std::vector<kg::EntityId> out;
    for (const auto& l : labels) out.push_back(f.kg.find_entity(l.get<std::string>()).value());
    return out;
  };
  for (const auto& r : j.at("records")) {
    eval::EvalRecord rec;
    rec.context_entities = ids(r.at("context"));
    rec.gold_response = text::split(r.at("gold_response").get<std::string>(), ' ');
    rec.gold_items = ids(r.at("gold_items"));
    rec.gold_entities = ids(r.at("gold_entities"));
    rec.generated = text::split(r.at("generated").get<std::string>(), ' ');
    rec.generated_entities = ids(r.at("generated_entities"));
    rec.ranked_items = ids(r.at("ranked"));
    for (const auto& p : r.at("paths")) {
      kg::ReasonPath path;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (i % 2 == 0) {
          path.entities.push_back(f.kg.find_entity(p.at(i).get<std::string>()).value());
        } else {
          path.relations.push_back(f.kg.find_relation(p.at(i).get<std::string>()).value());
        }
      }
      rec.paths.push_back(path);
    }
    f.records.push_back(std::move(rec));
  }
  for (const auto& [k, v] : j.at("expected").items()) f.expected[k] = v.get<double>();
  return f;
}

}  // namespace dicr::testing
