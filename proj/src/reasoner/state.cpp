#include "dicr/reasoner/state.hpp"

#include <algorithm>

#include "dicr/error.hpp"
#include "dicr/simd/kernels.hpp"

namespace dicr::reasoner {

int ActionSpace::find(const Action& a) const {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] == a) return static_cast<int>(i);
  }
  return -1;
}

std::vector<double> encode_state(std::span<const double> u, const kg::ReasonPath& path, int history,
                                 const kg::EmbeddingTable& emb) {
  if (path.entities.empty()) throw PreconditionError("encode_state needs at least the start entity");
  const auto d = static_cast<std::size_t>(emb.dim());
  if (u.size() != d) throw ConfigError("preference width does not match the embedding dimension");
  std::vector<double> out((2 * static_cast<std::size_t>(history) + 2) * d, 0.0);
  std::copy(u.begin(), u.end(), out.begin());
  const auto t = static_cast<long>(path.length());
  std::size_t slot = 1;
  for (long k = history; k >= 1; --k, slot += 2) {
    // Entity e_{t-k} then relation r_{t-k+1}.
    const long ei = t - k;
    if (ei >= 0) {
      const auto e = emb.entity(path.entities[static_cast<std::size_t>(ei)]);
      std::copy(e.begin(), e.end(), out.begin() + static_cast<long>(slot * d));
      const auto r = emb.relation(path.relations[static_cast<std::size_t>(ei)]);
      std::copy(r.begin(), r.end(), out.begin() + static_cast<long>((slot + 1) * d));
    }
  }
  const auto e = emb.entity(path.last());
  std::copy(e.begin(), e.end(), out.begin() + static_cast<long>(slot * d));
  return out;
}

ActionSpace action_space(const kg::KnowledgeGraph& kg, const kg::ReasonPath& path, std::size_t cap,
                         std::span<const double> u, const kg::EmbeddingTable& emb) {
  if (cap < 1) throw ConfigError("action cap must be at least 1");
  const EntityId cur = path.last();
  ActionSpace space;
  for (const auto& edge : kg.outgoing(cur)) {
    if (std::find(path.entities.begin(), path.entities.end(), edge.entity) != path.entities.end()) continue;
    space.actions.push_back(Action{edge.relation, edge.entity});
  }
  if (space.actions.size() > cap - 1) {
    std::vector<std::pair<double, Action>> scored;
    scored.reserve(space.actions.size());
    for (const auto& a : space.actions) scored.emplace_back(simd::dot(emb.entity(a.entity), u), a);
    std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first > y.first;
      if (x.second.relation != y.second.relation) return x.second.relation < y.second.relation;
      return x.second.entity < y.second.entity;
    });
    scored.resize(cap - 1);
    space.actions.clear();
    for (const auto& s : scored) space.actions.push_back(s.second);
    std::sort(space.actions.begin(), space.actions.end(), [](const Action& a, const Action& b) {
      return a.relation != b.relation ? a.relation < b.relation : a.entity < b.entity;
    });
  }
  space.actions.push_back(Action{kSelfLoop, cur});
  return space;
}

kg::ReasonPath extend(const kg::ReasonPath& path, const Action& a) {
  kg::ReasonPath out = path;
  if (a.is_self_loop()) {
    out.terminal = true;
  } else {
    out.relations.push_back(a.relation);
    out.entities.push_back(a.entity);
  }
  return out;
}

}  // namespace dicr::reasoner
