#include "dicr/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "dicr/error.hpp"
#include "dicr/util/text.hpp"

namespace dicr::eval {

namespace {

constexpr double kBleuSmoothing = 1e-9;

using Gram = std::vector<std::string>;

std::map<Gram, int> count_grams(const std::vector<std::string>& tokens, int n) {
  std::map<Gram, int> out;
  const auto len = static_cast<int>(tokens.size());
  for (int i = 0; i + n <= len; ++i) ++out[Gram(tokens.begin() + i, tokens.begin() + i + n)];
  return out;
}

std::set<EntityId> to_set(std::span<const EntityId> v) { return {v.begin(), v.end()}; }

bool path_links(const kg::ReasonPath& p, EntityId a, EntityId b) {
  for (std::size_t i = 0; i + 1 < p.entities.size(); ++i) {
    const auto x = p.entities[i], y = p.entities[i + 1];
    if ((x == a && y == b) || (x == b && y == a)) return true;
  }
  return false;
}

bool pair_linked(const EvalRecord& r, const kg::KnowledgeGraph& kg, Scope scope, EntityId a, EntityId b) {
  if (a == b) return false;
  if (scope == Scope::kGraph) return kg.linked(a, b);
  return std::any_of(r.paths.begin(), r.paths.end(), [&](const kg::ReasonPath& p) { return path_links(p, a, b); });
}

}  // namespace

double recall_at_k(std::span<const EntityId> ranked, std::span<const EntityId> gold, std::size_t k) {
  const auto n = std::min(k, ranked.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (std::find(gold.begin(), gold.end(), ranked[i]) != gold.end()) return 1.0;
  }
  return 0.0;
}

RecallSummary mean_recall_at_k(std::span<const EvalRecord> records, std::size_t k) {
  RecallSummary s;
  double sum = 0.0;
  for (const auto& r : records) {
    if (r.gold_items.empty()) {
      ++s.skipped;
      continue;
    }
    sum += recall_at_k(r.ranked_items, r.gold_items, k);
    ++s.counted;
  }
  if (s.counted > 0) s.mean = sum / static_cast<double>(s.counted);
  return s;
}

double bleu(const std::vector<std::vector<std::string>>& candidates,
            const std::vector<std::vector<std::string>>& references, int n) {
  if (candidates.size() != references.size()) throw PreconditionError("bleu: candidate/reference count mismatch");
  if (n < 1) throw PreconditionError("bleu: n must be positive");
  std::size_t cand_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    cand_len += candidates[i].size();
    ref_len += references[i].size();
  }
  if (cand_len == 0) return 0.0;

  double log_sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    double matched = 0.0, total = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto cand = count_grams(candidates[i], k);
      const auto ref = count_grams(references[i], k);
      for (const auto& [gram, c] : cand) {
        total += c;
        if (auto it = ref.find(gram); it != ref.end()) matched += std::min(c, it->second);
      }
    }
    if (matched == 0.0) matched = kBleuSmoothing;
    log_sum += std::log(matched / std::max(total, 1.0));
  }
  const double bp = cand_len > ref_len
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
  return bp * std::exp(log_sum / n);
}

double distinct_n(const std::vector<std::vector<std::string>>& responses, int n) {
  if (n < 1) throw PreconditionError("distinct_n: n must be positive");
  std::set<Gram> unique;
  std::size_t total = 0;
  for (const auto& r : responses) {
    for (const auto& [gram, c] : count_grams(r, n)) {
      unique.insert(gram);
      total += static_cast<std::size_t>(c);
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(unique.size()) / static_cast<double>(total);
}

double knowledge_f1(std::span<const EntityId> generated, std::span<const EntityId> gold) {
  const auto g = to_set(generated), t = to_set(gold);
  if (g.empty() && t.empty()) return 1.0;
  if (g.empty() || t.empty()) return 0.0;
  std::size_t overlap = 0;
  for (auto e : g) overlap += t.count(e);
  if (overlap == 0) return 0.0;
  const double p = static_cast<double>(overlap) / static_cast<double>(g.size());
  const double r = static_cast<double>(overlap) / static_cast<double>(t.size());
  return 2.0 * p * r / (p + r);
}

double mean_knowledge_f1(std::span<const EvalRecord> records) {
  if (records.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : records) sum += knowledge_f1(r.generated_entities, r.gold_entities);
  return sum / static_cast<double>(records.size());
}

bool record_hit(const EvalRecord& record, const kg::KnowledgeGraph& kg) {
  const auto generated = text::casefold(text::join(record.generated));
  for (auto item : record.gold_items) {
    const auto label = text::casefold(kg.entity_label(item));
    if (!label.empty() && generated.find(label) != std::string::npos) return true;
  }
  return false;
}

std::optional<double> hit_rate(std::span<const EvalRecord> records, const kg::KnowledgeGraph& kg) {
  std::size_t n = 0, hits = 0;
  for (const auto& r : records) {
    if (r.gold_items.empty()) continue;
    ++n;
    if (record_hit(r, kg)) ++hits;
  }
  if (n == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(n);
}

double explainability(std::span<const EvalRecord> records, const kg::KnowledgeGraph& kg, Scope scope,
                      Locus locus) {
  std::size_t n = 0, satisfied = 0;
  for (const auto& r : records) {
    if (r.generated.empty()) continue;
    ++n;
    const auto& resp = r.generated_entities;
    bool ok = false;
    if (locus == Locus::kInter) {
      for (auto c : r.context_entities) {
        for (auto e : resp) ok = ok || pair_linked(r, kg, scope, c, e);
      }
    } else {
      for (std::size_t i = 0; i < resp.size() && !ok; ++i) {
        for (std::size_t j = i + 1; j < resp.size(); ++j) ok = ok || pair_linked(r, kg, scope, resp[i], resp[j]);
      }
    }
    if (ok) ++satisfied;
  }
  return n == 0 ? 0.0 : static_cast<double>(satisfied) / static_cast<double>(n);
}

}  // namespace dicr::eval
