#include "dicr/kg/knowledge_graph.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "dicr/error.hpp"
#include "dicr/util/text.hpp"

namespace dicr::kg {
namespace {

struct TripletHash {
  std::size_t operator()(const Triplet& t) const {
    std::uint64_t h = static_cast<std::uint32_t>(t.head);
    h = h * 0x100000001B3ull ^ static_cast<std::uint32_t>(t.relation);
    h = h * 0x100000001B3ull ^ static_cast<std::uint32_t>(t.tail);
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

void build_csr(std::int32_t n, const std::vector<Triplet>& triplets, bool forward,
               std::vector<std::size_t>& offsets, std::vector<Edge>& edges) {
  offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& t : triplets) ++offsets[static_cast<std::size_t>(forward ? t.head : t.tail) + 1];
  for (std::size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];
  edges.resize(triplets.size());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const auto& t : triplets) {
    const auto src = static_cast<std::size_t>(forward ? t.head : t.tail);
    edges[cursor[src]++] = Edge{t.relation, forward ? t.tail : t.head};
  }
  for (std::int32_t e = 0; e < n; ++e) {
    std::sort(edges.begin() + static_cast<std::ptrdiff_t>(offsets[static_cast<std::size_t>(e)]),
              edges.begin() + static_cast<std::ptrdiff_t>(offsets[static_cast<std::size_t>(e) + 1]));
  }
}

}  // namespace

std::int32_t LabelIndex::intern(const std::string& label) {
  auto [it, inserted] = ids_.try_emplace(label, static_cast<std::int32_t>(labels_.size()));
  if (inserted) labels_.push_back(label);
  return it->second;
}

std::optional<std::int32_t> LabelIndex::find(const std::string& label) const {
  auto it = ids_.find(label);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

KnowledgeGraph KnowledgeGraph::from_records(std::span<const TripletRecord> records) {
  if (records.empty()) throw ParseError("knowledge graph has no triplets");
  KnowledgeGraph kg;
  std::unordered_set<Triplet, TripletHash> seen;
  seen.reserve(records.size());
  kg.triplets_.reserve(records.size());
  for (const auto& rec : records) {
    if (rec.head.empty() || rec.relation.empty() || rec.tail.empty()) {
      throw ParseError("empty label in triplet", rec.line);
    }
    const EntityId h = kg.entities_.intern(rec.head);
    const RelationId r = kg.relations_.intern(rec.relation);
    const EntityId t = kg.entities_.intern(rec.tail);
    const Triplet trip{h, r, t};
    if (seen.insert(trip).second) kg.triplets_.push_back(trip);
  }
  build_csr(kg.num_entities(), kg.triplets_, true, kg.out_offsets_, kg.out_edges_);
  build_csr(kg.num_entities(), kg.triplets_, false, kg.in_offsets_, kg.in_edges_);
  return kg;
}

std::vector<TripletRecord> KnowledgeGraph::parse_tsv(std::istream& is) {
  std::vector<TripletRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    auto fields = text::split(line, '\t');
    if (fields.size() != 3) {
      throw ParseError("expected head<TAB>relation<TAB>tail, got " + std::to_string(fields.size()) +
                           " field(s)",
                       lineno);
    }
    records.push_back(TripletRecord{std::move(fields[0]), std::move(fields[1]), std::move(fields[2]), lineno});
  }
  return records;
}

KnowledgeGraph KnowledgeGraph::load_tsv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open knowledge graph file " + path);
  const auto records = parse_tsv(is);
  return from_records(records);
}

void KnowledgeGraph::save_tsv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  for (const auto& t : triplets_) {
    os << entity_label(t.head) << '\t' << relation_label(t.relation) << '\t' << entity_label(t.tail)
       << '\n';
  }
}

std::span<const Edge> KnowledgeGraph::outgoing(EntityId e) const {
  if (!valid_entity(e)) throw LookupError("unknown entity id " + std::to_string(e));
  const auto b = out_offsets_[static_cast<std::size_t>(e)];
  const auto n = out_offsets_[static_cast<std::size_t>(e) + 1] - b;
  return std::span<const Edge>(out_edges_).subspan(b, n);
}

std::span<const Edge> KnowledgeGraph::incoming(EntityId e) const {
  if (!valid_entity(e)) throw LookupError("unknown entity id " + std::to_string(e));
  const auto b = in_offsets_[static_cast<std::size_t>(e)];
  const auto n = in_offsets_[static_cast<std::size_t>(e) + 1] - b;
  return std::span<const Edge>(in_edges_).subspan(b, n);
}

bool KnowledgeGraph::has_triplet(EntityId h, RelationId r, EntityId t) const {
  if (!valid_entity(h) || !valid_entity(t)) return false;
  const auto edges = outgoing(h);
  return std::binary_search(edges.begin(), edges.end(), Edge{r, t});
}

bool KnowledgeGraph::linked(EntityId a, EntityId b) const {
  if (!valid_entity(a) || !valid_entity(b)) return false;
  auto touches = [](std::span<const Edge> edges, EntityId x) {
    return std::any_of(edges.begin(), edges.end(), [x](const Edge& e) { return e.entity == x; });
  };
  const auto oa = outgoing(a);
  const auto ia = incoming(a);
  return touches(oa, b) || touches(ia, b);
}

}  // namespace dicr::kg
