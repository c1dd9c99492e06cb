#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dicr/kg/knowledge_graph.hpp"

namespace dicr::kg {

// Entity and relation vectors, row-major.  kNoEntity maps to a zero row.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(int dim, std::int32_t num_entities, std::int32_t num_relations);

  int dim() const { return dim_; }
  std::int32_t num_entities() const { return num_entities_; }
  std::int32_t num_relations() const { return num_relations_; }

  std::span<const double> entity(EntityId e) const;
  std::span<const double> relation(RelationId r) const;
  std::span<double> mutable_entity(EntityId e);
  std::span<double> mutable_relation(RelationId r);

  bool all_finite() const;
  bool operator==(const EmbeddingTable& other) const = default;

  static constexpr std::uint32_t kFormatVersion = 1;
  void save(const std::string& path) const;
  static EmbeddingTable load(const std::string& path);

 private:
  int dim_ = 0;
  std::int32_t num_entities_ = 0;
  std::int32_t num_relations_ = 0;
  std::vector<double> entities_;
  std::vector<double> relations_;
  std::vector<double> zero_;
};

struct TransEConfig {
  int dim = 128;
  int epochs = 100;
  double margin = 1.0;
  double learning_rate = 0.01;
  std::uint64_t seed = 7;
};

struct TransEResult {
  EmbeddingTable table;
  // Mean hinge loss per epoch.
  std::vector<double> epoch_loss;
};

// Margin ranking with uniform head-or-tail corruption and L2 distance.
TransEResult train_embeddings(const KnowledgeGraph& kg, const TransEConfig& config);

// ||h + r - t||_2
double translation_distance(const EmbeddingTable& table, EntityId h, RelationId r, EntityId t);

}  // namespace dicr::kg
