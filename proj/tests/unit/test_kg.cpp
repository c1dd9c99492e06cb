#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "dicr/error.hpp"
#include "dicr/kg/embedding.hpp"
#include "dicr/kg/knowledge_graph.hpp"
#include "dicr/kg/linker.hpp"
#include "dicr/kg/path.hpp"
#include "dicr/kg/preference.hpp"
#include "dicr/util/rng.hpp"
#include "dicr/util/text.hpp"

using namespace dicr;
using namespace dicr::kg;

namespace {

KnowledgeGraph movies() {
  std::stringstream ss(
      "GoldenEye\tdirected_by\tMartin Campbell\n"
      "GoldenEye\tstarring\tPierce Brosnan\n"
      "Casino Royale\tdirected_by\tMartin Campbell\n"
      "Casino Royale\tstarring\tDaniel Craig\n"
      "GoldenEye\tstarring\tPierce Brosnan\n");
  return KnowledgeGraph::from_records(KnowledgeGraph::parse_tsv(ss));
}

KnowledgeGraph random_kg(Rng& rng, int n_ent, int n_rel, int n_triplets) {
  std::vector<TripletRecord> recs;
  for (int i = 0; i < n_triplets; ++i) {
    recs.push_back({"e" + std::to_string(rng.index(n_ent)), "r" + std::to_string(rng.index(n_rel)),
                    "e" + std::to_string(rng.index(n_ent)), static_cast<std::size_t>(i + 1)});
  }
  return KnowledgeGraph::from_records(recs);
}

}  // namespace

TEST_CASE("tsv parsing deduplicates and indexes in first-occurrence order") {
  const auto kg = movies();
  CHECK(kg.triplets().size() == 4);
  CHECK(kg.num_entities() == 5);
  CHECK(kg.num_relations() == 2);
  CHECK(kg.entity_label(0) == "GoldenEye");
  const auto ge = *kg.find_entity("GoldenEye");
  const auto mc = *kg.find_entity("Martin Campbell");
  CHECK(kg.has_triplet(ge, *kg.find_relation("directed_by"), mc));
  CHECK(kg.linked(mc, ge));
  CHECK_FALSE(kg.linked(ge, *kg.find_entity("Daniel Craig")));
  CHECK(kg.outgoing(ge).size() == 2);
  CHECK(kg.incoming(mc).size() == 2);
  CHECK_THROWS_AS(kg.outgoing(99), LookupError);
}

TEST_CASE("malformed tsv reports the line") {
  std::stringstream ss("a\tr\tb\nbroken line\n");
  try {
    KnowledgeGraph::parse_tsv(ss);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::vector<TripletRecord> none;
  CHECK_THROWS_AS(KnowledgeGraph::from_records(none), ParseError);
  CHECK_THROWS_AS(KnowledgeGraph::load_tsv("/nonexistent/kg.tsv"), IoError);
}

TEST_CASE("tsv save and load round-trip") {
  const auto kg = movies();
  const auto path = (std::filesystem::temp_directory_path() / "dicr_kg_roundtrip.tsv").string();
  kg.save_tsv(path);
  const auto back = KnowledgeGraph::load_tsv(path);
  CHECK(back.triplets() == kg.triplets());
  CHECK(back.entities().labels() == kg.entities().labels());
}

TEST_CASE("linker finds leftmost-longest mentions case-insensitively") {
  const auto kg = movies();
  AliasTable aliases = {{"bond", "Pierce Brosnan"}};
  EntityLinker linker(kg, &aliases);
  const auto toks = text::tokenize("Have you seen goldeneye with Pierce Brosnan or Casino Royale ?");
  const auto m = linker.link(toks);
  REQUIRE(m.size() == 3);
  CHECK(m[0].entity == *kg.find_entity("GoldenEye"));
  CHECK(m[1].entity == *kg.find_entity("Pierce Brosnan"));
  CHECK(m[1].end - m[1].begin == 2);
  CHECK(m[2].entity == *kg.find_entity("Casino Royale"));
  const auto a = linker.link(text::tokenize("I like bond"));
  REQUIRE(a.size() == 1);
  CHECK(a[0].entity == *kg.find_entity("Pierce Brosnan"));
  CHECK(linker.link(text::tokenize("nothing here")).empty());
}

TEST_CASE("path validity") {
  const auto kg = movies();
  const auto ge = *kg.find_entity("GoldenEye"), mc = *kg.find_entity("Martin Campbell"),
             cr = *kg.find_entity("Casino Royale");
  const auto dir = *kg.find_relation("directed_by");
  ReasonPath p;
  p.entities = {ge};
  CHECK(path_is_valid(p, kg));
  p.entities = {ge, mc};
  p.relations = {dir};
  CHECK(path_is_valid(p, kg));
  // Reverse hop is not a triplet.
  p.entities = {ge, mc, cr};
  p.relations = {dir, dir};
  CHECK_FALSE(path_is_valid(p, kg));
  p.entities = {ge, mc, ge};
  CHECK_FALSE(path_is_valid(p, kg));
}

TEST_CASE("user preference is the mean embedding, zero for the sentinel") {
  EmbeddingTable t(2, 3, 1);
  t.mutable_entity(0)[0] = 1.0;
  t.mutable_entity(1)[0] = 3.0;
  t.mutable_entity(1)[1] = 2.0;
  const std::vector<EntityId> both = {0, 1};
  const auto u = user_preference(both, t);
  CHECK(u.vector[0] == doctest::Approx(2.0));
  CHECK(u.vector[1] == doctest::Approx(1.0));
  const std::vector<EntityId> none = {kNoEntity};
  const auto z = user_preference(none, t);
  CHECK(z.vector == std::vector<double>{0.0, 0.0});
  CHECK_THROWS_AS(user_preference(std::vector<EntityId>{}, t), PreconditionError);
  CHECK_THROWS_AS(t.entity(7), LookupError);
}

TEST_CASE("embedding checkpoint round-trip and version check") {
  EmbeddingTable t(3, 2, 2);
  t.mutable_relation(1)[2] = 0.5;
  const auto path = (std::filesystem::temp_directory_path() / "dicr_emb.bin").string();
  t.save(path);
  CHECK(EmbeddingTable::load(path) == t);
  CHECK_THROWS_AS(EmbeddingTable::load("/nonexistent/emb.bin"), IoError);
}

TEST_CASE("transe separates true triplets from corrupted ones") {
  Rng rng(21);
  const auto kg = random_kg(rng, 30, 3, 80);
  TransEConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 60;
  const auto res = train_embeddings(kg, cfg);
  CHECK(res.table.all_finite());
  CHECK(res.epoch_loss.back() < res.epoch_loss.front());
  double pos = 0.0, neg = 0.0;
  for (const auto& t : kg.triplets()) {
    pos += translation_distance(res.table, t.head, t.relation, t.tail);
    neg += translation_distance(res.table, t.head, t.relation,
                                static_cast<EntityId>(rng.index(static_cast<std::size_t>(kg.num_entities()))));
  }
  CHECK(pos < neg);
  // Same seed, same table.
  CHECK(train_embeddings(kg, cfg).table == res.table);
}

TEST_SUITE("invariants") {
  TEST_CASE("adjacency is sorted and consistent with the triplet list") {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
      const auto kg = random_kg(rng, 5 + static_cast<int>(rng.index(20)), 1 + static_cast<int>(rng.index(4)),
                                1 + static_cast<int>(rng.index(60)));
      std::set<Triplet> uniq(kg.triplets().begin(), kg.triplets().end());
      CHECK(uniq.size() == kg.triplets().size());
      std::size_t out_total = 0, in_total = 0;
      for (EntityId e = 0; e < kg.num_entities(); ++e) {
        const auto out = kg.outgoing(e);
        const auto in = kg.incoming(e);
        out_total += out.size();
        in_total += in.size();
        CHECK(std::is_sorted(out.begin(), out.end()));
        CHECK(std::is_sorted(in.begin(), in.end()));
        for (const auto& edge : out) CHECK(kg.has_triplet(e, edge.relation, edge.entity));
        for (const auto& edge : in) CHECK(kg.has_triplet(edge.entity, edge.relation, e));
      }
      CHECK(out_total == kg.triplets().size());
      CHECK(in_total == kg.triplets().size());
    }
  }

  TEST_CASE("linked mentions never overlap and cover their label") {
    Rng rng(9);
    const auto kg = movies();
    EntityLinker linker(kg);
    const std::vector<std::string> pool = {"goldeneye", "casino", "royale", "pierce", "brosnan", "martin",
                                           "campbell", "daniel", "craig", "the", "and", "."};
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::string> toks;
      for (std::size_t i = 0, n = rng.index(12); i < n; ++i) toks.push_back(pool[rng.index(pool.size())]);
      const auto m = linker.link(toks);
      for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(m[i].begin < m[i].end);
        CHECK(m[i].end <= toks.size());
        if (i > 0) CHECK(m[i - 1].end <= m[i].begin);
        std::vector<std::string> span(toks.begin() + static_cast<long>(m[i].begin),
                                      toks.begin() + static_cast<long>(m[i].end));
        CHECK(text::normalize_token(text::join(span, "")) ==
              text::normalize_token(kg.entity_label(m[i].entity)));
      }
    }
  }
}
