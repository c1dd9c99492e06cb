#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dicr/kg/knowledge_graph.hpp"
#include "dicr/kg/path.hpp"

namespace dicr::eval {

using kg::EntityId;

// One evaluated test turn.
struct EvalRecord {
  std::vector<EntityId> context_entities;
  std::vector<std::string> gold_response;
  std::vector<EntityId> gold_items;
  // Entities linked in the gold response.
  std::vector<EntityId> gold_entities;
  std::vector<std::string> generated;
  std::vector<EntityId> generated_entities;
  // Candidate paths handed to the decoder.
  std::vector<kg::ReasonPath> paths;
  // Recommended items, best first, no duplicates.
  std::vector<EntityId> ranked_items;
};

// 1 if any gold item is among the first k ranked items.
double recall_at_k(std::span<const EntityId> ranked, std::span<const EntityId> gold, std::size_t k);

struct RecallSummary {
  double mean = 0.0;
  std::size_t counted = 0;
  // Records without gold items.
  std::size_t skipped = 0;
};

RecallSummary mean_recall_at_k(std::span<const EvalRecord> records, std::size_t k);

// Corpus-level BLEU-n: brevity penalty times the geometric mean of the
// clipped 1..n-gram precisions.  Zero match counts are smoothed by 1e-9.
double bleu(const std::vector<std::vector<std::string>>& candidates,
            const std::vector<std::vector<std::string>>& references, int n);

// Distinct n-grams over all n-grams of the corpus; 0 when there are none.
double distinct_n(const std::vector<std::vector<std::string>>& responses, int n);

// Entity-set F1; two empty sets score 1.
double knowledge_f1(std::span<const EntityId> generated, std::span<const EntityId> gold);
double mean_knowledge_f1(std::span<const EvalRecord> records);

// Case-folded substring match of gold item labels in the generated text.
// Empty when no record has gold items.
std::optional<double> hit_rate(std::span<const EvalRecord> records, const kg::KnowledgeGraph& kg);
bool record_hit(const EvalRecord& record, const kg::KnowledgeGraph& kg);

enum class Scope { kGraph, kPath };
enum class Locus { kInter, kInner };

// Share of records (with a generated response) having at least one entity
// pair linked by a KG triplet (kGraph) or by consecutive hops of a candidate
// path (kPath).  Inter pairs a context entity with a response entity, inner
// pairs two response entities.
double explainability(std::span<const EvalRecord> records, const kg::KnowledgeGraph& kg, Scope scope, Locus locus);

}  // namespace dicr::eval
