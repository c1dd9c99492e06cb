#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dicr {
class Rng;
}

namespace dicr::ad {

// A trainable row-major matrix with an accumulated gradient buffer.
class Parameter {
 public:
  Parameter(std::string name, int rows, int cols)
      : name_(std::move(name)),
        rows_(rows),
        cols_(cols),
        value_(static_cast<std::size_t>(rows) * cols, 0.0),
        grad_(value_.size(), 0.0) {}

  const std::string& name() const { return name_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return value_.size(); }

  std::span<double> value() { return value_; }
  std::span<const double> value() const { return value_; }
  std::span<double> grad() { return grad_; }
  std::span<const double> grad() const { return grad_; }

  std::span<double> row(int r) { return value().subspan(static_cast<std::size_t>(r) * cols_, cols_); }
  std::span<const double> row(int r) const {
    return value().subspan(static_cast<std::size_t>(r) * cols_, cols_);
  }

  void zero_grad();
  void fill(double v);
  // U(-bound, bound); the default bound is 1/sqrt(cols).
  void init_uniform(Rng& rng, double bound = -1.0);

 private:
  std::string name_;
  int rows_;
  int cols_;
  std::vector<double> value_;
  std::vector<double> grad_;
};

// Owns parameters with stable addresses, in insertion order.
class ParameterStore {
 public:
  Parameter& add(const std::string& name, int rows, int cols);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  Parameter& at(std::size_t i) { return *params_[i]; }
  const Parameter& at(std::size_t i) const { return *params_[i]; }

  void zero_grad();
  double grad_norm() const;
  // Rescales gradients so their global L2 norm is at most max_norm.
  void clip_grad_norm(double max_norm);
  bool all_finite() const;
  std::size_t num_values() const;

  // Copies values (not gradients) from a store with identical layout.
  void copy_values_from(const ParameterStore& other);
  bool same_values(const ParameterStore& other) const;

  void write(std::ostream& os) const;
  // Layout (names and shapes) must match the store being read into.
  void read(std::istream& is);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

struct NamedStore {
  std::string name;
  ParameterStore* store;
};

// Versioned checkpoint holding several named parameter stores.
void save_checkpoint(const std::string& path, const std::vector<NamedStore>& stores);
void load_checkpoint(const std::string& path, const std::vector<NamedStore>& stores);

}  // namespace dicr::ad
