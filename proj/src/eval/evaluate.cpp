#include "dicr/eval/evaluate.hpp"

#include <algorithm>

#include "dicr/error.hpp"

namespace dicr::eval {

Inference infer(const InferenceSetup& s, const corpus::TrainingExample& example) {
  if (s.kg == nullptr || s.embeddings == nullptr || s.nets == nullptr || s.model == nullptr || s.vocab == nullptr) {
    throw PreconditionError("inference setup is incomplete");
  }
  Inference out;
  std::vector<std::vector<std::string>> statements;
  if (const auto start = reasoner::episode_start(example, *s.embeddings)) {
    const auto keep = std::max(s.n_ranked, s.n_paths);
    out.beam = reasoner::beam_search(*s.nets, *s.kg, *s.embeddings, *start, s.limits, std::max(s.beam_width, std::size_t{1}), keep);
    out.ranked_items = reasoner::ranked_items(out.beam);
    const auto n = std::min(s.n_paths, out.beam.size());
    out.candidates.assign(out.beam.begin(), out.beam.begin() + static_cast<std::ptrdiff_t>(n));
    const corpus::RelationTemplates defaults;
    for (const auto& p : out.candidates) {
      statements.push_back(converse::path_statement(p, *s.kg, s.templates != nullptr ? *s.templates : defaults));
    }
  }
  if (statements.empty()) statements = converse::fallback_paths();
  const std::vector<std::string> none;
  const auto prepared = converse::prepare_example(*s.vocab, example.context, none, none, statements);
  out.response = converse::generate_response(*s.model, *s.vocab, prepared, s.generation);
  return out;
}

EvalRecord make_record(const corpus::TrainingExample& example, Inference inference, const kg::EntityLinker& linker) {
  EvalRecord r;
  r.context_entities = example.context_entities;
  r.gold_response = example.response;
  r.gold_items = example.gold_items;
  r.gold_entities = example.response_entities;
  r.generated = std::move(inference.response);
  for (const auto& m : linker.link(r.generated)) {
    if (std::find(r.generated_entities.begin(), r.generated_entities.end(), m.entity) == r.generated_entities.end()) {
      r.generated_entities.push_back(m.entity);
    }
  }
  r.paths = std::move(inference.candidates);
  r.ranked_items = std::move(inference.ranked_items);
  return r;
}

std::vector<EvalRecord> evaluate_examples(const InferenceSetup& setup,
                                          std::span<const corpus::TrainingExample> examples) {
  const kg::EntityLinker linker(*setup.kg, setup.aliases);
  std::vector<EvalRecord> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(make_record(ex, infer(setup, ex), linker));
  return out;
}

MetricsReport summarize(std::span<const EvalRecord> records, const kg::KnowledgeGraph& kg, int n_paths) {
  if (records.empty()) throw PreconditionError("no records to evaluate");
  MetricsReport m;
  m.n_examples = records.size();
  m.n_paths = n_paths;
  m.recall_1 = mean_recall_at_k(records, 1).mean;
  m.recall_10 = mean_recall_at_k(records, 10).mean;
  m.recall_25 = mean_recall_at_k(records, 25).mean;
  std::vector<std::vector<std::string>> cands, refs;
  for (const auto& r : records) {
    cands.push_back(r.generated);
    refs.push_back(r.gold_response);
  }
  m.bleu1 = bleu(cands, refs, 1);
  m.bleu2 = bleu(cands, refs, 2);
  m.dist1 = distinct_n(cands, 1);
  m.dist2 = distinct_n(cands, 2);
  m.f1 = mean_knowledge_f1(records);
  m.hit = hit_rate(records, kg);
  m.g_inter = explainability(records, kg, Scope::kGraph, Locus::kInter);
  m.g_inner = explainability(records, kg, Scope::kGraph, Locus::kInner);
  m.p_inter = explainability(records, kg, Scope::kPath, Locus::kInter);
  m.p_inner = explainability(records, kg, Scope::kPath, Locus::kInner);
  return m;
}

}  // namespace dicr::eval
