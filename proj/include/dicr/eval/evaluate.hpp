#pragma once

#include <span>
#include <string>
#include <vector>

#include "dicr/converse/pipeline.hpp"
#include "dicr/corpus/templates.hpp"
#include "dicr/eval/metrics.hpp"
#include "dicr/eval/report.hpp"
#include "dicr/kg/linker.hpp"
#include "dicr/reasoner/search.hpp"

namespace dicr::eval {

// Frozen modules used at inference.
struct InferenceSetup {
  const kg::KnowledgeGraph* kg = nullptr;
  const kg::EmbeddingTable* embeddings = nullptr;
  const reasoner::PolicyNetworks* nets = nullptr;
  converse::ConverseModel* model = nullptr;
  const corpus::Vocab* vocab = nullptr;
  const corpus::RelationTemplates* templates = nullptr;
  const kg::AliasTable* aliases = nullptr;
  reasoner::SearchLimits limits;
  std::size_t beam_width = 25;
  // Candidate paths handed to the decoder.
  std::size_t n_paths = 10;
  // Beam paths kept for ranking; at least n_paths.
  std::size_t n_ranked = 25;
  converse::GenerationOptions generation;
};

struct Inference {
  // Beam output, best first; the first n_paths are the candidates.
  std::vector<kg::ReasonPath> beam;
  std::vector<kg::ReasonPath> candidates;
  std::vector<kg::EntityId> ranked_items;
  std::vector<std::string> response;
};

// Beam search from the example's start entity, then greedy decoding over the
// top candidates.  Without a start entity the decoder gets the placeholder
// path and nothing is ranked.
Inference infer(const InferenceSetup& setup, const corpus::TrainingExample& example);

EvalRecord make_record(const corpus::TrainingExample& example, Inference inference, const kg::EntityLinker& linker);

std::vector<EvalRecord> evaluate_examples(const InferenceSetup& setup,
                                          std::span<const corpus::TrainingExample> examples);

// Every metric over the records.  n_paths is copied into the report.
MetricsReport summarize(std::span<const EvalRecord> records, const kg::KnowledgeGraph& kg, int n_paths);

}  // namespace dicr::eval
