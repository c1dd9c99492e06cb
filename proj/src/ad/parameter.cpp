#include "dicr/ad/parameter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dicr/error.hpp"
#include "dicr/util/binary_io.hpp"
#include "dicr/util/rng.hpp"

namespace dicr::ad {

namespace {
constexpr char kCheckpointMagic[9] = "DICRCKPT";
constexpr std::uint32_t kCheckpointVersion = 1;
void skip_store(std::istream& is) {
  const auto count = bin::read_u32(is);
  std::vector<double> scratch;
  for (std::uint32_t i = 0; i < count; ++i) {
    bin::read_string(is);
    const auto rows = bin::read_u32(is);
    const auto cols = bin::read_u32(is);
    scratch.resize(static_cast<std::size_t>(rows) * cols);
    bin::read_f64s(is, scratch);
  }
}

}  // namespace

void Parameter::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

void Parameter::fill(double v) { std::fill(value_.begin(), value_.end(), v); }

void Parameter::init_uniform(Rng& rng, double bound) {
  if (bound < 0.0) bound = 1.0 / std::sqrt(static_cast<double>(std::max(cols_, 1)));
  for (double& v : value_) v = rng.uniform(-bound, bound);
}

Parameter& ParameterStore::add(const std::string& name, int rows, int cols) {
  if (contains(name)) throw ConfigError("duplicate parameter '" + name + "'");
  if (rows <= 0 || cols <= 0) throw ConfigError("parameter '" + name + "' has an empty shape");
  params_.push_back(std::make_unique<Parameter>(name, rows, cols));
  return *params_.back();
}

Parameter& ParameterStore::get(const std::string& name) {
  for (auto& p : params_) {
    if (p->name() == name) return *p;
  }
  throw LookupError("no parameter named '" + name + "'");
}

const Parameter& ParameterStore::get(const std::string& name) const {
  return const_cast<ParameterStore*>(this)->get(name);
}

bool ParameterStore::contains(const std::string& name) const {
  return std::any_of(params_.begin(), params_.end(),
                     [&](const auto& p) { return p->name() == name; });
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

double ParameterStore::grad_norm() const {
  double s = 0.0;
  for (const auto& p : params_) {
    for (double g : p->grad()) s += g * g;
  }
  return std::sqrt(s);
}

void ParameterStore::clip_grad_norm(double max_norm) {
  if (max_norm <= 0.0) return;
  const double norm = grad_norm();
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (auto& p : params_) {
    for (double& g : p->grad()) g *= scale;
  }
}

bool ParameterStore::all_finite() const {
  for (const auto& p : params_) {
    for (double v : p->value()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

std::size_t ParameterStore::num_values() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->size();
  return n;
}

void ParameterStore::copy_values_from(const ParameterStore& other) {
  if (other.size() != size()) throw ConfigError("parameter layouts differ");
  for (std::size_t i = 0; i < size(); ++i) {
    auto& dst = at(i);
    const auto& src = other.at(i);
    if (dst.name() != src.name() || dst.size() != src.size()) {
      throw ConfigError("parameter layouts differ at '" + dst.name() + "'");
    }
    std::copy(src.value().begin(), src.value().end(), dst.value().begin());
  }
}

bool ParameterStore::same_values(const ParameterStore& other) const {
  if (other.size() != size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    const auto a = at(i).value();
    const auto b = other.at(i).value();
    if (a.size() != b.size() || !std::equal(a.begin(), a.end(), b.begin())) return false;
  }
  return true;
}

void ParameterStore::write(std::ostream& os) const {
  bin::write_u32(os, static_cast<std::uint32_t>(params_.size()));
  for (const auto& p : params_) {
    bin::write_string(os, p->name());
    bin::write_u32(os, static_cast<std::uint32_t>(p->rows()));
    bin::write_u32(os, static_cast<std::uint32_t>(p->cols()));
    bin::write_f64s(os, p->value());
  }
}

void ParameterStore::read(std::istream& is) {
  const auto count = bin::read_u32(is);
  if (count != params_.size()) {
    throw VersionError("checkpoint holds " + std::to_string(count) + " parameters, expected " +
                       std::to_string(params_.size()));
  }
  for (auto& p : params_) {
    const auto name = bin::read_string(is);
    const auto rows = static_cast<int>(bin::read_u32(is));
    const auto cols = static_cast<int>(bin::read_u32(is));
    if (name != p->name() || rows != p->rows() || cols != p->cols()) {
      throw VersionError("checkpoint parameter '" + name + "' does not match '" + p->name() + "'");
    }
    bin::read_f64s(is, p->value());
  }
}

void save_checkpoint(const std::string& path, const std::vector<NamedStore>& stores) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write checkpoint " + path);
  bin::write_magic(os, kCheckpointMagic);
  bin::write_u32(os, kCheckpointVersion);
  bin::write_u32(os, static_cast<std::uint32_t>(stores.size()));
  for (const auto& s : stores) {
    bin::write_string(os, s.name);
    s.store->write(os);
  }
}

void load_checkpoint(const std::string& path, const std::vector<NamedStore>& stores) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read checkpoint " + path);
  bin::expect_magic(is, kCheckpointMagic, "checkpoint");
  const auto version = bin::read_u32(is);
  if (version != kCheckpointVersion) {
    throw VersionError("unsupported checkpoint format_version " + std::to_string(version));
  }
  const auto count = bin::read_u32(is);
  std::vector<bool> seen(stores.size(), false);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name = bin::read_string(is);
    auto it = std::find_if(stores.begin(), stores.end(),
                           [&](const NamedStore& s) { return s.name == name; });
    if (it == stores.end()) {
      skip_store(is);
      continue;
    }
    it->store->read(is);
    seen[static_cast<std::size_t>(it - stores.begin())] = true;
  }
  for (std::size_t i = 0; i < stores.size(); ++i) {
    if (!seen[i]) throw VersionError(path + " has no section '" + stores[i].name + "'");
  }
}

}  // namespace dicr::ad
