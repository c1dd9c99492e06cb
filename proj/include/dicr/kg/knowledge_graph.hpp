#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dicr::kg {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

// Sentinel for "no entity": out-of-KG mentions and the empty-context
// fallback.  Its embedding is the zero vector.
inline constexpr EntityId kNoEntity = -1;

struct Triplet {
  EntityId head;
  RelationId relation;
  EntityId tail;
  auto operator<=>(const Triplet&) const = default;
};

struct Edge {
  RelationId relation;
  EntityId entity;
  auto operator<=>(const Edge&) const = default;
};

struct TripletRecord {
  std::string head;
  std::string relation;
  std::string tail;
  std::size_t line = 0;
};

// Dense ids in first-occurrence order with stable string labels.
class LabelIndex {
 public:
  std::int32_t intern(const std::string& label);
  std::optional<std::int32_t> find(const std::string& label) const;
  const std::string& label(std::int32_t id) const { return labels_.at(static_cast<std::size_t>(id)); }
  std::int32_t size() const { return static_cast<std::int32_t>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

// Immutable knowledge graph with CSR adjacency in both directions.
class KnowledgeGraph {
 public:
  static KnowledgeGraph from_records(std::span<const TripletRecord> records);
  static KnowledgeGraph load_tsv(const std::string& path);
  static std::vector<TripletRecord> parse_tsv(std::istream& is);
  void save_tsv(const std::string& path) const;

  const LabelIndex& entities() const { return entities_; }
  const LabelIndex& relations() const { return relations_; }
  std::int32_t num_entities() const { return entities_.size(); }
  std::int32_t num_relations() const { return relations_.size(); }

  // Unique triplets in first-occurrence order.
  const std::vector<Triplet>& triplets() const { return triplets_; }

  // Outgoing (relation, tail) pairs sorted by (relation id, tail id).
  std::span<const Edge> outgoing(EntityId e) const;
  // Incoming (relation, head) pairs sorted by (relation id, head id).
  std::span<const Edge> incoming(EntityId e) const;

  bool has_triplet(EntityId h, RelationId r, EntityId t) const;
  // True if some triplet links a and b in either direction.
  bool linked(EntityId a, EntityId b) const;
  bool valid_entity(EntityId e) const { return e >= 0 && e < num_entities(); }

  std::optional<EntityId> find_entity(const std::string& label) const { return entities_.find(label); }
  std::optional<RelationId> find_relation(const std::string& label) const {
    return relations_.find(label);
  }
  const std::string& entity_label(EntityId e) const { return entities_.label(e); }
  const std::string& relation_label(RelationId r) const { return relations_.label(r); }

 private:
  LabelIndex entities_;
  LabelIndex relations_;
  std::vector<Triplet> triplets_;
  std::vector<std::size_t> out_offsets_;
  std::vector<Edge> out_edges_;
  std::vector<std::size_t> in_offsets_;
  std::vector<Edge> in_edges_;
};

}  // namespace dicr::kg
