#pragma once

#include <span>
#include <vector>

#include "dicr/kg/embedding.hpp"
#include "dicr/kg/knowledge_graph.hpp"
#include "dicr/kg/path.hpp"

namespace dicr::reasoner {

using kg::EntityId;
using kg::RelationId;

// Relation id of the terminating self-loop action.
inline constexpr RelationId kSelfLoop = -1;

struct Action {
  RelationId relation = kSelfLoop;
  EntityId entity = kg::kNoEntity;
  bool is_self_loop() const { return relation == kSelfLoop; }
  bool operator==(const Action&) const = default;
};

// Candidate actions from the current entity; the self-loop is always last.
struct ActionSpace {
  std::vector<Action> actions;
  std::size_t size() const { return actions.size(); }
  std::size_t self_loop_index() const { return actions.size() - 1; }
  // Index of `a`, or -1.
  int find(const Action& a) const;
};

// u (+) e_{t-H} (+) r_{t-H+1} (+) ... (+) r_t (+) e_t, zero padded; length (2H+2)d.
std::vector<double> encode_state(std::span<const double> u, const kg::ReasonPath& path, int history,
                                 const kg::EmbeddingTable& emb);

// Outgoing edges of the current entity minus visited entities, plus the
// self-loop.  Past the cap, the cap-1 edges whose tails score highest
// against u are kept (ties by relation, then entity).
ActionSpace action_space(const kg::KnowledgeGraph& kg, const kg::ReasonPath& path, std::size_t cap,
                         std::span<const double> u, const kg::EmbeddingTable& emb);

// Appends a hop; the self-loop marks the path terminal instead.
kg::ReasonPath extend(const kg::ReasonPath& path, const Action& a);

}  // namespace dicr::reasoner
