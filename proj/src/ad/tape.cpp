#include "dicr/ad/tape.hpp"

#include <cassert>

#include "dicr/error.hpp"

namespace dicr::ad {

std::span<const double> Var::value() const { return tape->value(*this); }
double Var::item() const { return tape->value(*this)[0]; }
int Var::rows() const { return tape->rows(*this); }
int Var::cols() const { return tape->cols(*this); }
std::size_t Var::size() const { return tape->value(*this).size(); }

Var Tape::constant(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  return constant(std::move(v), n, 1);
}

Var Tape::constant(std::vector<double> v, int rows, int cols) {
  return push(std::move(v), rows, cols, false, nullptr);
}

Var Tape::scalar(double v) { return constant(std::vector<double>{v}, 1, 1); }

Var Tape::zeros(int n) { return constant(std::vector<double>(static_cast<std::size_t>(n), 0.0)); }

Var Tape::param(Parameter& p) {
  Node node;
  node.rows = p.rows();
  node.cols = p.cols();
  node.external_value = p.value().data();
  node.external_grad = p.grad().data();
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  return make_var(static_cast<int>(nodes_.size()) - 1);
}

Var Tape::row(Parameter& p, int r) {
  if (r < 0 || r >= p.rows()) {
    throw LookupError("row " + std::to_string(r) + " out of range for '" + p.name() + "'");
  }
  Node node;
  node.rows = p.cols();
  node.cols = 1;
  node.external_value = p.row(r).data();
  node.external_grad = p.grad().data() + static_cast<std::size_t>(r) * p.cols();
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  return make_var(static_cast<int>(nodes_.size()) - 1);
}

std::span<const double> Tape::value(Var v) const {
  const Node& n = nodes_[static_cast<std::size_t>(v.id)];
  const std::size_t len = static_cast<std::size_t>(n.rows) * n.cols;
  if (n.external_value != nullptr) return {n.external_value, len};
  return n.value;
}

std::span<double> Tape::grad(Var v) {
  Node& n = nodes_[static_cast<std::size_t>(v.id)];
  if (!n.requires_grad) return {};
  const std::size_t len = static_cast<std::size_t>(n.rows) * n.cols;
  if (n.external_grad != nullptr) return {n.external_grad, len};
  return n.grad;
}

std::span<const double> Tape::grad(Var v) const {
  return const_cast<Tape*>(this)->grad(v);
}

Var Tape::push(std::vector<double> value, int rows, int cols, bool requires_grad,
               Backward backward) {
  assert(static_cast<std::size_t>(rows) * cols == value.size());
  Node node;
  node.rows = rows;
  node.cols = cols;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) {
    node.grad.assign(node.value.size(), 0.0);
    node.backward = std::move(backward);
  }
  nodes_.push_back(std::move(node));
  return make_var(static_cast<int>(nodes_.size()) - 1);
}

void Tape::backward(Var loss, double seed) {
  if (loss.tape != this) throw PreconditionError("loss belongs to a different tape");
  if (value(loss).size() != 1) throw PreconditionError("backward() needs a scalar loss");
  if (!requires_grad(loss)) return;
  grad(loss)[0] += seed;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.requires_grad && n.backward) n.backward(*this);
  }
}

}  // namespace dicr::ad
