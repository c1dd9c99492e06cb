#pragma once

// Brute-force reference implementations used to cross-check the library.
// They deliberately share no code with src/.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "dicr/eval/metrics.hpp"
#include "dicr/kg/knowledge_graph.hpp"
#include "dicr/reasoner/networks.hpp"
#include "dicr/reasoner/state.hpp"

namespace dicr::oracle {

inline double recall(const std::vector<eval::EvalRecord>& records, std::size_t k) {
  double hits = 0.0, n = 0.0;
  for (const auto& r : records) {
    if (r.gold_items.empty()) continue;
    n += 1.0;
    bool found = false;
    for (std::size_t i = 0; i < r.ranked_items.size() && i < k; ++i) {
      for (auto g : r.gold_items) found = found || r.ranked_items[i] == g;
    }
    if (found) hits += 1.0;
  }
  return n == 0.0 ? 0.0 : hits / n;
}

// Occurrences of tokens[pos, pos + n) inside seq, by scanning.
inline int occurrences(const std::vector<std::string>& seq, const std::vector<std::string>& gram) {
  int c = 0;
  for (std::size_t i = 0; i + gram.size() <= seq.size(); ++i) {
    bool eq = true;
    for (std::size_t j = 0; j < gram.size(); ++j) eq = eq && seq[i + j] == gram[j];
    if (eq) ++c;
  }
  return c;
}

inline double bleu(const std::vector<std::vector<std::string>>& cand, const std::vector<std::vector<std::string>>& ref,
                   int n) {
  double c_len = 0.0, r_len = 0.0;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    c_len += static_cast<double>(cand[i].size());
    r_len += static_cast<double>(ref[i].size());
  }
  if (c_len == 0.0) return 0.0;
  double log_p = 0.0;
  for (int k = 1; k <= n; ++k) {
    double match = 0.0, total = 0.0;
    for (std::size_t s = 0; s < cand.size(); ++s) {
      const auto& c = cand[s];
      // Each distinct gram once, clipped by its reference count.
      std::set<std::vector<std::string>> seen;
      for (std::size_t i = 0; i + static_cast<std::size_t>(k) <= c.size(); ++i) {
        total += 1.0;
        std::vector<std::string> g(c.begin() + static_cast<long>(i), c.begin() + static_cast<long>(i) + k);
        if (!seen.insert(g).second) continue;
        match += std::min(occurrences(c, g), occurrences(ref[s], g));
      }
    }
    if (match == 0.0) match = 1e-9;
    if (total == 0.0) total = 1.0;
    log_p += std::log(match / total);
  }
  const double bp = c_len > r_len ? 1.0 : std::exp(1.0 - r_len / c_len);
  return bp * std::exp(log_p / n);
}

inline double distinct(const std::vector<std::vector<std::string>>& responses, int n) {
  std::vector<std::string> grams;
  for (const auto& r : responses) {
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= r.size(); ++i) {
      std::string key;
      for (int j = 0; j < n; ++j) key += r[i + static_cast<std::size_t>(j)] + '\x1f';
      grams.push_back(key);
    }
  }
  if (grams.empty()) return 0.0;
  std::vector<std::string> uniq = grams;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  return static_cast<double>(uniq.size()) / static_cast<double>(grams.size());
}

inline double f1(std::vector<kg::EntityId> a, std::vector<kg::EntityId> b) {
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  if (a.empty() && b.empty()) return 1.0;
  double common = 0.0;
  for (auto x : a) common += std::count(b.begin(), b.end(), x);
  if (common == 0.0) return 0.0;
  const double p = common / static_cast<double>(a.size()), r = common / static_cast<double>(b.size());
  return 2.0 * p * r / (p + r);
}

inline double mean_f1(const std::vector<eval::EvalRecord>& records) {
  double s = 0.0;
  for (const auto& r : records) s += f1(r.generated_entities, r.gold_entities);
  return records.empty() ? 0.0 : s / static_cast<double>(records.size());
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline double hit(const std::vector<eval::EvalRecord>& records, const kg::KnowledgeGraph& kg) {
  double n = 0.0, h = 0.0;
  for (const auto& r : records) {
    if (r.gold_items.empty()) continue;
    n += 1.0;
    std::string text;
    for (std::size_t i = 0; i < r.generated.size(); ++i) text += (i ? " " : "") + r.generated[i];
    text = lower(text);
    bool any = false;
    for (auto g : r.gold_items) any = any || text.find(lower(kg.entity_label(g))) != std::string::npos;
    if (any) h += 1.0;
  }
  return n == 0.0 ? -1.0 : h / n;
}

inline bool triplet_between(const kg::KnowledgeGraph& kg, kg::EntityId a, kg::EntityId b) {
  for (const auto& t : kg.triplets()) {
    if ((t.head == a && t.tail == b) || (t.head == b && t.tail == a)) return true;
  }
  return false;
}

inline bool hop_between(const std::vector<kg::ReasonPath>& paths, kg::EntityId a, kg::EntityId b) {
  for (const auto& p : paths) {
    for (std::size_t i = 1; i < p.entities.size(); ++i) {
      const auto x = p.entities[i - 1], y = p.entities[i];
      if ((x == a && y == b) || (x == b && y == a)) return true;
    }
  }
  return false;
}

// graph: true for KG links, false for candidate-path links.
inline double explain(const std::vector<eval::EvalRecord>& records, const kg::KnowledgeGraph& kg, bool graph,
                      bool inter) {
  double n = 0.0, ok = 0.0;
  for (const auto& r : records) {
    if (r.generated.empty()) continue;
    n += 1.0;
    std::vector<std::pair<kg::EntityId, kg::EntityId>> pairs;
    if (inter) {
      for (auto c : r.context_entities) {
        for (auto e : r.generated_entities) pairs.emplace_back(c, e);
      }
    } else {
      for (std::size_t i = 0; i < r.generated_entities.size(); ++i) {
        for (std::size_t j = 0; j < r.generated_entities.size(); ++j) {
          if (i < j) pairs.emplace_back(r.generated_entities[i], r.generated_entities[j]);
        }
      }
    }
    bool any = false;
    for (const auto& [a, b] : pairs) {
      if (a == b) continue;
      any = any || (graph ? triplet_between(kg, a, b) : hop_between(r.paths, a, b));
    }
    if (any) ok += 1.0;
  }
  return n == 0.0 ? 0.0 : ok / n;
}

// Every complete path from `start` (self-loop or max_len hops) with its
// cumulative log policy probability, by depth-first enumeration.
inline std::vector<kg::ReasonPath> enumerate_paths(const reasoner::PolicyNetworks& nets, const kg::KnowledgeGraph& kg,
                                                   const kg::EmbeddingTable& emb, kg::EntityId start,
                                                   const std::vector<double>& u, std::size_t max_len,
                                                   std::size_t cap, int history) {
  std::vector<kg::ReasonPath> out;
  std::function<void(const kg::ReasonPath&)> visit = [&](const kg::ReasonPath& p) {
    if (p.terminal || p.length() == max_len) {
      out.push_back(p);
      return;
    }
    const auto space = reasoner::action_space(kg, p, cap, u, emb);
    const auto state = reasoner::encode_state(u, p, history, emb);
    const auto pi = reasoner::policy_forward(nets, state, space, emb);
    for (std::size_t i = 0; i < space.size(); ++i) {
      kg::ReasonPath next = p;
      const auto& a = space.actions[i];
      if (a.is_self_loop()) {
        next.terminal = true;
      } else {
        next.entities.push_back(a.entity);
        next.relations.push_back(a.relation);
      }
      next.score = p.score + std::log(pi[i]);
      visit(next);
    }
  };
  kg::ReasonPath root;
  root.entities.push_back(start);
  visit(root);
  return out;
}

}  // namespace dicr::oracle
