#include "dicr/corpus/example.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace dicr::corpus {
namespace {

void push_distinct(std::vector<EntityId>& out, EntityId e) {
  if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
}

}  // namespace

std::optional<kg::ReasonPath> shortest_gold_path(std::span<const EntityId> context_entities, EntityId target,
                                                  const kg::KnowledgeGraph& kg, int max_len) {
  if (!kg.valid_entity(target) || max_len < 1) return std::nullopt;
  constexpr int kFar = std::numeric_limits<int>::max();
  // Reverse breadth-first distances to the target, bounded by max_len.
  std::vector<int> dist(static_cast<std::size_t>(kg.num_entities()), kFar);
  std::deque<EntityId> queue{target};
  dist[static_cast<std::size_t>(target)] = 0;
  while (!queue.empty()) {
    const EntityId cur = queue.front();
    queue.pop_front();
    const int d = dist[static_cast<std::size_t>(cur)];
    if (d == max_len) continue;
    for (const auto& edge : kg.incoming(cur)) {
      auto& slot = dist[static_cast<std::size_t>(edge.entity)];
      if (slot == kFar) {
        slot = d + 1;
        queue.push_back(edge.entity);
      }
    }
  }

  EntityId start = kg::kNoEntity;
  int best = kFar;
  for (EntityId e : context_entities) {
    if (!kg.valid_entity(e) || e == target) continue;
    const int d = dist[static_cast<std::size_t>(e)];
    if (d < best) {
      best = d;
      start = e;
    }
  }
  if (start == kg::kNoEntity) return std::nullopt;

  kg::ReasonPath path;
  path.entities.push_back(start);
  EntityId cur = start;
  for (int remaining = best; remaining > 0; --remaining) {
    // Edges are sorted by (relation, entity), so the first hit is the smallest.
    for (const auto& edge : kg.outgoing(cur)) {
      if (dist[static_cast<std::size_t>(edge.entity)] == remaining - 1) {
        path.relations.push_back(edge.relation);
        path.entities.push_back(edge.entity);
        cur = edge.entity;
        break;
      }
    }
  }
  path.terminal = true;
  return path;
}

std::optional<GoldShiftPath> extract_gold_path(const TrainingExample& example, const kg::KnowledgeGraph& kg,
                                               int max_len, const RelationTemplates& templates) {
  for (EntityId item : example.gold_items) {
    if (auto p = shortest_gold_path(example.context_entities, item, kg, max_len)) {
      return GoldShiftPath{*p, tokenize_path(*p, kg, templates)};
    }
  }
  return std::nullopt;
}

std::vector<TrainingExample> build_examples(const std::vector<Dialog>& dialogs, const kg::KnowledgeGraph& kg,
                                            const RelationTemplates& templates, int max_len) {
  std::vector<TrainingExample> out;
  for (const auto& dialog : dialogs) {
    for (std::size_t ti = 0; ti < dialog.turns.size(); ++ti) {
      const Turn& turn = dialog.turns[ti];
      if (turn.speaker != Speaker::kSystem) continue;
      TrainingExample ex;
      ex.dialog_id = dialog.id;
      ex.turn_index = ti;
      const std::size_t first = ti > kContextTurns ? ti - kContextTurns : 0;
      for (std::size_t ci = first; ci < ti; ++ci) {
        const Turn& ct = dialog.turns[ci];
        ex.context.push_back(ct.speaker == Speaker::kUser ? kUserTag : kSystemTag);
        ex.context.insert(ex.context.end(), ct.tokens.begin(), ct.tokens.end());
        for (const auto& m : ct.mentions) {
          push_distinct(ex.context_entities, m.entity);
          ex.last_mentioned = m.entity;
        }
      }
      ex.response = turn.tokens;
      for (const auto& m : turn.mentions) push_distinct(ex.response_entities, m.entity);
      ex.gold_items = turn.items;
      for (EntityId item : ex.gold_items) {
        auto p = shortest_gold_path(ex.context_entities, item, kg, max_len);
        if (p) {
          ex.item_paths.push_back(GoldShiftPath{*p, tokenize_path(*p, kg, templates)});
        } else {
          ex.item_paths.push_back(std::nullopt);
        }
        if (!ex.gold_path && ex.item_paths.back()) ex.gold_path = ex.item_paths.back();
      }
      out.push_back(std::move(ex));
    }
  }
  return out;
}

}  // namespace dicr::corpus
