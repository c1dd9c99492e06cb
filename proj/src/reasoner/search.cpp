#include "dicr/reasoner/search.hpp"

#include <algorithm>
#include <cmath>

#include "dicr/error.hpp"
#include "dicr/kg/preference.hpp"

namespace dicr::reasoner {

std::optional<EpisodeStart> episode_start(const corpus::TrainingExample& example, const kg::EmbeddingTable& emb) {
  if (example.last_mentioned == kg::kNoEntity || example.context_entities.empty()) return std::nullopt;
  EpisodeStart s;
  s.start = example.last_mentioned;
  s.preference = kg::user_preference(example.context_entities, emb).vector;
  return s;
}

Rollout rollout(const PolicyNetworks& nets, const kg::KnowledgeGraph& kg, const kg::EmbeddingTable& emb,
                const EpisodeStart& start, const SearchLimits& limits, RolloutMode mode, Rng* rng) {
  if (mode == RolloutMode::kSample && rng == nullptr) throw PreconditionError("sampling rollout needs an rng");
  if (!kg.valid_entity(start.start)) throw LookupError("invalid start entity");
  Rollout out;
  out.path.entities.push_back(start.start);
  while (!out.path.terminal) {
    if (out.path.length() >= limits.max_len) {
      out.path.terminal = true;
      break;
    }
    StepRecord step;
    step.prefix = out.path;
    step.state = encode_state(start.preference, out.path, limits.history, emb);
    step.space = action_space(kg, out.path, limits.action_cap, start.preference, emb);
    const auto probs = policy_forward(nets, step.state, step.space, emb);
    if (mode == RolloutMode::kSample) {
      step.chosen = static_cast<int>(rng->categorical(probs));
    } else {
      step.chosen = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    }
    out.path.score += std::log(probs[static_cast<std::size_t>(step.chosen)]);
    const double score = out.path.score;
    out.path = extend(out.path, step.space.actions[static_cast<std::size_t>(step.chosen)]);
    out.path.score = score;
    out.steps.push_back(std::move(step));
  }
  return out;
}

std::vector<kg::ReasonPath> beam_search(const PolicyNetworks& nets, const kg::KnowledgeGraph& kg,
                                        const kg::EmbeddingTable& emb, const EpisodeStart& start,
                                        const SearchLimits& limits, std::size_t width, std::size_t n_paths) {
  if (width < 1) throw ConfigError("beam width must be positive");
  if (!kg.valid_entity(start.start)) throw LookupError("invalid start entity");
  std::vector<kg::ReasonPath> beams(1);
  beams[0].entities.push_back(start.start);
  for (std::size_t depth = 0; depth < limits.max_len; ++depth) {
    std::vector<kg::ReasonPath> next;
    for (const auto& b : beams) {
      if (b.terminal) {
        next.push_back(b);
        continue;
      }
      const auto state = encode_state(start.preference, b, limits.history, emb);
      const auto space = action_space(kg, b, limits.action_cap, start.preference, emb);
      const auto probs = policy_forward(nets, state, space, emb);
      for (std::size_t i = 0; i < space.size(); ++i) {
        auto p = extend(b, space.actions[i]);
        p.score = b.score + std::log(probs[i]);
        if (p.length() >= limits.max_len) p.terminal = true;
        next.push_back(std::move(p));
      }
    }
    std::stable_sort(next.begin(), next.end(),
                     [](const kg::ReasonPath& a, const kg::ReasonPath& b) { return a.score > b.score; });
    if (next.size() > width) next.resize(width);
    beams = std::move(next);
    if (std::all_of(beams.begin(), beams.end(), [](const kg::ReasonPath& p) { return p.terminal; })) break;
  }
  std::vector<kg::ReasonPath> out;
  for (auto& b : beams) {
    b.terminal = true;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const kg::ReasonPath& o) { return o.same_route(b); });
    if (!dup) out.push_back(std::move(b));
    if (out.size() >= n_paths) break;
  }
  return out;
}

std::vector<EntityId> ranked_items(std::span<const kg::ReasonPath> paths) {
  std::vector<EntityId> out;
  for (const auto& p : paths) {
    if (std::find(out.begin(), out.end(), p.last()) == out.end()) out.push_back(p.last());
  }
  return out;
}

}  // namespace dicr::reasoner
