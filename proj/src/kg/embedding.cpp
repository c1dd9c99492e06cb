#include "dicr/kg/embedding.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "dicr/error.hpp"
#include "dicr/simd/kernels.hpp"
#include "dicr/util/binary_io.hpp"
#include "dicr/util/rng.hpp"

namespace dicr::kg {
namespace {

constexpr char kEmbeddingMagic[9] = "DICREMBT";

void normalize(std::span<double> v) {
  const double n = std::sqrt(simd::dot(v, v));
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
}

}  // namespace

EmbeddingTable::EmbeddingTable(int dim, std::int32_t num_entities, std::int32_t num_relations)
    : dim_(dim),
      num_entities_(num_entities),
      num_relations_(num_relations),
      entities_(static_cast<std::size_t>(dim) * num_entities, 0.0),
      relations_(static_cast<std::size_t>(dim) * num_relations, 0.0),
      zero_(static_cast<std::size_t>(dim), 0.0) {}

std::span<const double> EmbeddingTable::entity(EntityId e) const {
  if (e == kNoEntity) return zero_;
  if (e < 0 || e >= num_entities_) throw LookupError("entity id " + std::to_string(e) + " has no embedding");
  return std::span<const double>(entities_).subspan(static_cast<std::size_t>(e) * dim_, dim_);
}

std::span<const double> EmbeddingTable::relation(RelationId r) const {
  if (r < 0 || r >= num_relations_) throw LookupError("relation id " + std::to_string(r) + " has no embedding");
  return std::span<const double>(relations_).subspan(static_cast<std::size_t>(r) * dim_, dim_);
}

std::span<double> EmbeddingTable::mutable_entity(EntityId e) {
  if (e < 0 || e >= num_entities_) throw LookupError("entity id " + std::to_string(e) + " has no embedding");
  return std::span<double>(entities_).subspan(static_cast<std::size_t>(e) * dim_, dim_);
}

std::span<double> EmbeddingTable::mutable_relation(RelationId r) {
  if (r < 0 || r >= num_relations_) throw LookupError("relation id " + std::to_string(r) + " has no embedding");
  return std::span<double>(relations_).subspan(static_cast<std::size_t>(r) * dim_, dim_);
}

bool EmbeddingTable::all_finite() const {
  for (double v : entities_) {
    if (!std::isfinite(v)) return false;
  }
  for (double v : relations_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void EmbeddingTable::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  bin::write_magic(os, kEmbeddingMagic);
  bin::write_u32(os, kFormatVersion);
  bin::write_u32(os, static_cast<std::uint32_t>(dim_));
  bin::write_u32(os, static_cast<std::uint32_t>(num_entities_));
  bin::write_u32(os, static_cast<std::uint32_t>(num_relations_));
  bin::write_f64s(os, entities_);
  bin::write_f64s(os, relations_);
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open embedding checkpoint " + path);
  bin::expect_magic(is, kEmbeddingMagic, "embedding checkpoint");
  const auto version = bin::read_u32(is);
  if (version != kFormatVersion) {
    throw VersionError("unsupported embedding format_version " + std::to_string(version));
  }
  const auto dim = static_cast<int>(bin::read_u32(is));
  const auto ne = static_cast<std::int32_t>(bin::read_u32(is));
  const auto nr = static_cast<std::int32_t>(bin::read_u32(is));
  EmbeddingTable table(dim, ne, nr);
  bin::read_f64s(is, table.entities_);
  bin::read_f64s(is, table.relations_);
  return table;
}

double translation_distance(const EmbeddingTable& table, EntityId h, RelationId r, EntityId t) {
  return std::sqrt(simd::translation_sq(table.entity(h), table.relation(r), table.entity(t)));
}

TransEResult train_embeddings(const KnowledgeGraph& kg, const TransEConfig& config) {
  if (config.dim < 2) throw ConfigError("embedding dim must be at least 2");
  if (config.epochs < 1) throw ConfigError("embedding epochs must be positive");
  if (!(config.margin > 0.0)) throw ConfigError("margin must be positive");
  if (kg.triplets().empty() || kg.num_entities() < 2) throw ConfigError("knowledge graph is empty");

  Rng rng(config.seed);
  EmbeddingTable table(config.dim, kg.num_entities(), kg.num_relations());
  const double bound = 6.0 / std::sqrt(static_cast<double>(config.dim));
  for (EntityId e = 0; e < kg.num_entities(); ++e) {
    for (double& x : table.mutable_entity(e)) x = rng.uniform(-bound, bound);
  }
  for (RelationId r = 0; r < kg.num_relations(); ++r) {
    auto v = table.mutable_relation(r);
    for (double& x : v) x = rng.uniform(-bound, bound);
    normalize(v);
  }

  const auto& triplets = kg.triplets();
  std::vector<std::size_t> order(triplets.size());
  std::iota(order.begin(), order.end(), 0);
  const auto dim = static_cast<std::size_t>(config.dim);
  std::vector<double> diff_pos(dim);
  std::vector<double> diff_neg(dim);

  TransEResult result;
  result.epoch_loss.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (EntityId e = 0; e < kg.num_entities(); ++e) normalize(table.mutable_entity(e));
    for (RelationId r = 0; r < kg.num_relations(); ++r) normalize(table.mutable_relation(r));
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t idx : order) {
      const Triplet& pos = triplets[idx];
      Triplet neg = pos;
      const bool corrupt_head = rng.bernoulli(0.5);
      EntityId& slot = corrupt_head ? neg.head : neg.tail;
      const EntityId original = slot;
      do {
        slot = static_cast<EntityId>(rng.index(static_cast<std::size_t>(kg.num_entities())));
      } while (slot == original);

      auto h = table.mutable_entity(pos.head);
      auto t = table.mutable_entity(pos.tail);
      auto r = table.mutable_relation(pos.relation);
      auto nh = table.mutable_entity(neg.head);
      auto nt = table.mutable_entity(neg.tail);
      double d_pos = 0.0;
      double d_neg = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        diff_pos[i] = h[i] + r[i] - t[i];
        diff_neg[i] = nh[i] + r[i] - nt[i];
      }
      d_pos = std::sqrt(simd::dot(diff_pos, diff_pos));
      d_neg = std::sqrt(simd::dot(diff_neg, diff_neg));
      const double loss = config.margin + d_pos - d_neg;
      if (loss <= 0.0) continue;
      total += loss;
      const double lr = config.learning_rate;
      const double sp = d_pos > 0.0 ? lr / d_pos : 0.0;
      const double sn = d_neg > 0.0 ? lr / d_neg : 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double gp = sp * diff_pos[i];
        const double gn = sn * diff_neg[i];
        h[i] -= gp;
        t[i] += gp;
        r[i] -= gp - gn;
        nh[i] += gn;
        nt[i] -= gn;
      }
    }
    result.epoch_loss.push_back(total / static_cast<double>(triplets.size()));
  }
  result.table = std::move(table);
  return result;
}

}  // namespace dicr::kg
