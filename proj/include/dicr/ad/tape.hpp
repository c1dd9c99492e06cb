#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "dicr/ad/parameter.hpp"

// Reverse-mode automatic differentiation over dense double vectors and
// row-major matrices.  A Tape records one forward computation; backward()
// replays it in reverse and accumulates into Parameter gradients.
namespace dicr::ad {

class Tape;

struct Var {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  std::span<const double> value() const;
  double item() const;
  int rows() const;
  int cols() const;
  std::size_t size() const;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(std::vector<double> v);
  Var constant(std::vector<double> v, int rows, int cols);
  Var scalar(double v);
  Var zeros(int n);
  // Whole parameter; gradients flow straight into p.grad().
  Var param(Parameter& p);
  // One row of a parameter as a column vector (embedding lookup).
  Var row(Parameter& p, int r);

  std::span<const double> value(Var v) const;
  // Empty span for nodes that do not require gradients.
  std::span<double> grad(Var v);
  std::span<const double> grad(Var v) const;
  int rows(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].rows; }
  int cols(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].cols; }
  bool requires_grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].requires_grad; }

  Var push(std::vector<double> value, int rows, int cols, bool requires_grad, Backward backward);

  void backward(Var loss, double seed = 1.0);
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    int rows = 0;
    int cols = 0;
    std::vector<double> value;
    std::vector<double> grad;
    double* external_value = nullptr;
    double* external_grad = nullptr;
    bool requires_grad = false;
    Backward backward;
  };

  Var make_var(int id) { return Var{this, id}; }

  std::vector<Node> nodes_;
};

}  // namespace dicr::ad
