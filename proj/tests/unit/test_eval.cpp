#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/fixture.hpp"
#include "support/oracles.hpp"
#include "dicr/error.hpp"
#include "dicr/eval/evaluate.hpp"
#include "dicr/eval/metrics.hpp"
#include "dicr/eval/report.hpp"
#include "dicr/util/rng.hpp"

using namespace dicr;
using eval::EvalRecord;

namespace {

std::vector<std::string> words(const std::string& s) { return text::split(s, ' '); }

kg::KnowledgeGraph tiny_kg() {
  std::vector<kg::TripletRecord> r = {{"a", "r", "b", 1}, {"b", "r", "c", 2}, {"c", "s", "d", 3}};
  return kg::KnowledgeGraph::from_records(r);
}

}  // namespace

TEST_CASE("recall at k on a ranked list") {
  const std::vector<kg::EntityId> ranked = {0, 1, 2};
  const std::vector<kg::EntityId> gold = {1};
  CHECK(eval::recall_at_k(ranked, gold, 1) == 0.0);
  CHECK(eval::recall_at_k(ranked, gold, 10) == 1.0);
  CHECK(eval::recall_at_k({}, gold, 10) == 0.0);
}

TEST_CASE("recall skips records without gold items") {
  std::vector<EvalRecord> recs(3);
  recs[0].gold_items = {1};
  recs[0].ranked_items = {1};
  recs[1].gold_items = {2};
  recs[1].ranked_items = {1, 2};
  const auto s = eval::mean_recall_at_k(recs, 1);
  CHECK(s.counted == 2);
  CHECK(s.skipped == 1);
  CHECK(s.mean == doctest::Approx(0.5));
}

TEST_CASE("recall mean over twenty records equals a brute-force loop") {
  Rng rng(3);
  std::vector<EvalRecord> recs(20);
  for (auto& r : recs) {
    for (int i = 0; i < 30; ++i) r.ranked_items.push_back(static_cast<kg::EntityId>(rng.index(60)));
    if (rng.bernoulli(0.8)) r.gold_items = {static_cast<kg::EntityId>(rng.index(60))};
  }
  for (std::size_t k : {1, 10, 25}) CHECK(eval::mean_recall_at_k(recs, k).mean == oracle::recall(recs, k));
}

TEST_CASE("bleu identity, disjoint and hand-counted cases") {
  const auto x = words("the cat sat on the mat");
  CHECK(eval::bleu({x}, {x}, 1) == doctest::Approx(1.0));
  CHECK(eval::bleu({x}, {x}, 2) == doctest::Approx(1.0));
  CHECK(eval::bleu({words("a b c")}, {words("d e f")}, 1) < 1e-8);
  CHECK(eval::bleu({std::vector<std::string>{}}, {x}, 1) == 0.0);

  // candidate "the the the cat sat", reference "the cat sat on mat":
  // clipped unigrams the:1 cat:1 sat:1 -> 3/5, equal lengths so no penalty.
  const auto c = words("the the the cat sat");
  const auto r = words("the cat sat on mat");
  CHECK(eval::bleu({c}, {r}, 1) == doctest::Approx(3.0 / 5.0));
  // bigrams: the-the x2, the-cat, cat-sat -> the-cat, cat-sat match: 2/4
  CHECK(eval::bleu({c}, {r}, 2) == doctest::Approx(std::sqrt(3.0 / 5.0 * 2.0 / 4.0)));
  // Short candidate: brevity penalty exp(1 - 5/3).
  CHECK(eval::bleu({words("the cat sat")}, {r}, 1) == doctest::Approx(std::exp(1.0 - 5.0 / 3.0)));
}

TEST_CASE("distinct n") {
  CHECK(eval::distinct_n({words("a a a")}, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(eval::distinct_n({words("a b c d")}, 1) == 1.0);
  CHECK(eval::distinct_n({words("a b c d")}, 2) == 1.0);
  // "a b a" + "b a c": unigrams a,b,a,b,a,c -> 3/6; bigrams ab ba ba ac -> 3/4
  const std::vector<std::vector<std::string>> two = {words("a b a"), words("b a c")};
  CHECK(eval::distinct_n(two, 1) == doctest::Approx(0.5));
  CHECK(eval::distinct_n(two, 2) == doctest::Approx(0.75));
  CHECK(eval::distinct_n({std::vector<std::string>{}}, 1) == 0.0);
}

TEST_CASE("knowledge f1") {
  const std::vector<kg::EntityId> ab = {0, 1}, bc = {1, 2}, none;
  CHECK(eval::knowledge_f1(ab, ab) == 1.0);
  CHECK(eval::knowledge_f1(ab, std::vector<kg::EntityId>{5, 6}) == 0.0);
  CHECK(eval::knowledge_f1(ab, bc) == doctest::Approx(0.5));
  CHECK(eval::knowledge_f1(none, none) == 1.0);
  CHECK(eval::knowledge_f1(none, ab) == 0.0);
}

TEST_CASE("hit rate uses case-folded label matching") {
  std::vector<kg::TripletRecord> t = {{"Iron Man 3", "starring", "Robert Downey Jr.", 1}};
  const auto kg = kg::KnowledgeGraph::from_records(t);
  std::vector<EvalRecord> recs(3);
  recs[0].gold_items = {kg.find_entity("Iron Man 3").value()};
  recs[0].generated = words("you should watch iron man 3 .");
  recs[1].gold_items = {kg.find_entity("Iron Man 3").value()};
  recs[1].generated = words("i like movies .");
  recs[2].generated = words("hello");
  CHECK(eval::record_hit(recs[0], kg));
  CHECK_FALSE(eval::record_hit(recs[1], kg));
  CHECK(eval::hit_rate(recs, kg).value() == doctest::Approx(0.5));
  CHECK_FALSE(eval::hit_rate(std::span(recs).subspan(2), kg).has_value());
}

TEST_CASE("hit rate over ten records equals a manual count") {
  std::vector<kg::TripletRecord> t = {{"Alien", "genre", "Horror", 1}, {"Heat", "genre", "Crime", 2}};
  const auto kg = kg::KnowledgeGraph::from_records(t);
  std::vector<EvalRecord> recs(10);
  int expected = 0;
  for (int i = 0; i < 10; ++i) {
    recs[i].gold_items = {static_cast<kg::EntityId>(i % 4)};
    const bool says = i % 3 == 0;
    recs[i].generated = says ? words("try " + kg.entity_label(i % 4) + " !") : words("not sure");
    expected += says ? 1 : 0;
  }
  CHECK(eval::hit_rate(recs, kg).value() == doctest::Approx(expected / 10.0));
  CHECK(eval::hit_rate(recs, kg).value() == oracle::hit(recs, kg));
}

TEST_CASE("explainability of a response naming a film and its director") {
  std::vector<kg::TripletRecord> t = {{"GoldenEye", "directed_by", "Martin Campbell", 1}};
  const auto kg = kg::KnowledgeGraph::from_records(t);
  EvalRecord r;
  r.generated = words("goldeneye is directed by martin campbell .");
  r.generated_entities = {kg.find_entity("GoldenEye").value(), kg.find_entity("Martin Campbell").value()};
  const std::vector<EvalRecord> recs = {r};
  CHECK(eval::explainability(recs, kg, eval::Scope::kGraph, eval::Locus::kInner) == 1.0);
  CHECK(eval::explainability(recs, kg, eval::Scope::kPath, eval::Locus::kInner) == 0.0);

  EvalRecord empty;
  empty.generated = words("sure .");
  const std::vector<EvalRecord> none = {empty};
  CHECK(eval::explainability(none, kg, eval::Scope::kGraph, eval::Locus::kInner) == 0.0);
  CHECK(eval::explainability(none, kg, eval::Scope::kGraph, eval::Locus::kInter) == 0.0);
}

TEST_CASE("records without a generated response are skipped by explainability") {
  const auto kg = tiny_kg();
  EvalRecord linked;
  linked.generated = words("a b");
  linked.generated_entities = {0, 1};
  EvalRecord silent;
  silent.generated_entities = {0, 1};
  const std::vector<EvalRecord> recs = {linked, silent};
  CHECK(eval::explainability(recs, kg, eval::Scope::kGraph, eval::Locus::kInner) == 1.0);
}

TEST_SUITE("oracles") {
  TEST_CASE("every metric equals the brute-force oracle on the committed fixture") {
    const auto f = testing::load_metrics_fixture();
    const auto& R = f.records;
    std::vector<std::vector<std::string>> c, r;
    for (const auto& x : R) {
      c.push_back(x.generated);
      r.push_back(x.gold_response);
    }
    const auto report = eval::summarize(R, f.kg, 0);

    CHECK(report.recall_1 == oracle::recall(R, 1));
    CHECK(report.recall_10 == oracle::recall(R, 10));
    CHECK(report.recall_25 == oracle::recall(R, 25));
    CHECK(report.bleu1 == oracle::bleu(c, r, 1));
    CHECK(report.bleu2 == oracle::bleu(c, r, 2));
    CHECK(report.dist1 == oracle::distinct(c, 1));
    CHECK(report.dist2 == oracle::distinct(c, 2));
    CHECK(report.f1 == oracle::mean_f1(R));
    CHECK(report.hit.value() == oracle::hit(R, f.kg));
    CHECK(report.g_inter == oracle::explain(R, f.kg, true, true));
    CHECK(report.g_inner == oracle::explain(R, f.kg, true, false));
    CHECK(report.p_inter == oracle::explain(R, f.kg, false, true));
    CHECK(report.p_inner == oracle::explain(R, f.kg, false, false));

    // Committed values.
    const auto& e = f.expected;
    CHECK(report.recall_1 == doctest::Approx(e.at("recall@1")).epsilon(1e-12));
    CHECK(report.recall_10 == doctest::Approx(e.at("recall@10")).epsilon(1e-12));
    CHECK(report.recall_25 == doctest::Approx(e.at("recall@25")).epsilon(1e-12));
    CHECK(report.bleu1 == doctest::Approx(e.at("bleu1")).epsilon(1e-12));
    CHECK(report.bleu2 == doctest::Approx(e.at("bleu2")).epsilon(1e-12));
    CHECK(report.dist1 == doctest::Approx(e.at("dist1")).epsilon(1e-12));
    CHECK(report.dist2 == doctest::Approx(e.at("dist2")).epsilon(1e-12));
    CHECK(report.f1 == doctest::Approx(e.at("f1")).epsilon(1e-12));
    CHECK(*report.hit == doctest::Approx(e.at("hit")).epsilon(1e-12));
    CHECK(report.g_inter == doctest::Approx(e.at("g_inter")).epsilon(1e-12));
    CHECK(report.g_inner == doctest::Approx(e.at("g_inner")).epsilon(1e-12));
    CHECK(report.p_inter == doctest::Approx(e.at("p_inter")).epsilon(1e-12));
    CHECK(report.p_inner == doctest::Approx(e.at("p_inner")).epsilon(1e-12));
    CHECK(report.n_examples == static_cast<std::size_t>(e.at("n_examples")));
  }
}

TEST_SUITE("invariants") {
  TEST_CASE("metrics stay in [0, 1] and recall is monotone in k on random records") {
    Rng rng(11);
    std::vector<kg::TripletRecord> t;
    for (int i = 0; i < 40; ++i) {
      t.push_back({"n" + std::to_string(rng.index(15)), "r" + std::to_string(rng.index(3)),
                   "n" + std::to_string(rng.index(15)), static_cast<std::size_t>(i + 1)});
    }
    const auto kg = kg::KnowledgeGraph::from_records(t);
    const auto n_ent = static_cast<std::size_t>(kg.num_entities());
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<EvalRecord> recs(1 + rng.index(8));
      for (auto& r : recs) {
        auto pick = [&] { return static_cast<kg::EntityId>(rng.index(n_ent)); };
        for (std::size_t i = 0, n = rng.index(4); i < n; ++i) r.context_entities.push_back(pick());
        for (std::size_t i = 0, n = rng.index(3); i < n; ++i) r.gold_items.push_back(pick());
        for (std::size_t i = 0, n = rng.index(4); i < n; ++i) r.gold_entities.push_back(pick());
        for (std::size_t i = 0, n = rng.index(4); i < n; ++i) r.generated_entities.push_back(pick());
        for (std::size_t i = 0, n = rng.index(8); i < n; ++i) r.generated.push_back("w" + std::to_string(rng.index(6)));
        for (std::size_t i = 0, n = 1 + rng.index(8); i < n; ++i) r.gold_response.push_back("w" + std::to_string(rng.index(6)));
        for (std::size_t i = 0, n = rng.index(30); i < n; ++i) {
          auto e = pick();
          if (std::find(r.ranked_items.begin(), r.ranked_items.end(), e) == r.ranked_items.end()) r.ranked_items.push_back(e);
        }
        // KG-valid candidate paths built by walking outgoing edges.
        for (std::size_t i = 0, n = rng.index(3); i < n; ++i) {
          kg::ReasonPath p;
          p.entities.push_back(pick());
          for (int hop = 0; hop < 3; ++hop) {
            const auto out = kg.outgoing(p.last());
            if (out.empty()) break;
            const auto& edge = out[rng.index(out.size())];
            p.relations.push_back(edge.relation);
            p.entities.push_back(edge.entity);
          }
          r.paths.push_back(p);
        }
      }
      const auto m = eval::summarize(recs, kg, 1);
      for (double v : {m.recall_1, m.recall_10, m.recall_25, m.bleu1, m.bleu2, m.dist1, m.dist2, m.f1, m.g_inter,
                       m.g_inner, m.p_inter, m.p_inner}) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
      if (m.hit) CHECK((*m.hit >= 0.0 && *m.hit <= 1.0));
      CHECK(m.recall_1 <= m.recall_10);
      CHECK(m.recall_10 <= m.recall_25);
      CHECK(m.p_inter <= m.g_inter);
      CHECK(m.p_inner <= m.g_inner);
    }
  }

  TEST_CASE("bleu of a sequence with itself is 1 and an all-unique corpus is fully distinct") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<std::vector<std::string>> corpus(1 + rng.index(4));
      int next = 0;
      for (auto& s : corpus) {
        for (std::size_t i = 0, n = 2 + rng.index(6); i < n; ++i) s.push_back("t" + std::to_string(next++));
      }
      CHECK(eval::bleu(corpus, corpus, 1) == doctest::Approx(1.0));
      CHECK(eval::bleu(corpus, corpus, 2) == doctest::Approx(1.0));
      CHECK(eval::distinct_n(corpus, 1) == 1.0);
      CHECK(eval::distinct_n(corpus, 2) == 1.0);
    }
  }
}

TEST_CASE("report round-trips and names its fields") {
  eval::MetricsReport r;
  r.recall_1 = 0.25;
  r.recall_10 = 1.0 / 3.0;
  r.recall_25 = 0.5;
  r.bleu1 = 0.123456789012345;
  r.bleu2 = 0.1;
  r.dist1 = 0.2;
  r.dist2 = 0.3;
  r.f1 = 0.4;
  r.hit = 0.7;
  r.g_inter = 0.9;
  r.g_inner = 0.8;
  r.p_inter = 0.6;
  r.p_inner = 0.5;
  r.n_examples = 42;
  r.n_paths = 10;
  std::stringstream ss;
  eval::write_report(ss, r);
  const auto text = ss.str();
  for (const auto& name : eval::report_fields()) CHECK(text.find(name + ": ") != std::string::npos);
  CHECK(eval::read_report(ss) == r);

  r.hit.reset();
  std::stringstream s2;
  eval::write_report(s2, r);
  CHECK(s2.str().find("hit: null") != std::string::npos);
  CHECK(eval::read_report(s2) == r);
}

TEST_CASE("report schema mismatches are rejected") {
  std::stringstream ss("schema_version: 9\n--- json\n{\"schema_version\": 9}\n--- end\n");
  CHECK_THROWS_AS(eval::read_report(ss), VersionError);
  std::vector<eval::MetricsReport> mixed(2);
  mixed[1].schema_version = 2;
  CHECK_THROWS_AS(eval::emit_plots(mixed, (std::filesystem::temp_directory_path() / "dicr_mixed").string()),
                  VersionError);
}

TEST_CASE("sweep plots emit one image per metric and a table") {
  std::vector<eval::MetricsReport> reports(3);
  const int nps[] = {10, 1, 5};
  for (int i = 0; i < 3; ++i) {
    reports[i].n_paths = nps[i];
    reports[i].hit = 0.1 * (i + 1);
    reports[i].p_inter = 0.2 * (i + 1);
  }
  const auto dir = std::filesystem::temp_directory_path() / "dicr_plot_test";
  std::filesystem::remove_all(dir);
  const auto files = eval::emit_plots(reports, dir.string());
  CHECK(files.images.size() == 5);
  for (const auto& img : files.images) {
    std::ifstream is(img, std::ios::binary);
    std::string magic;
    is >> magic;
    CHECK(magic == "P6");
  }
  std::ifstream csv(files.csv);
  std::string header, first;
  std::getline(csv, header);
  std::getline(csv, first);
  CHECK(header == "n_paths,hit,g_inter,g_inner,p_inter,p_inner");
  CHECK(first.rfind("1,", 0) == 0);
}
