#include "asrk/tensor/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "asrk/errors.hpp"

namespace asrk::tensor {

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << "x";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

namespace detail {

std::vector<double>& Node::ensure_grad() {
  if (grad.empty()) grad.assign(value.size(), 0.0);
  return grad;
}

}  // namespace detail

namespace {

void validate_shape(const Shape& shape, std::size_t values) {
  if (shape.empty()) throw Error(ErrorKind::dimension, "tensor shape must have at least one axis");
  for (std::size_t d : shape) {
    if (d == 0) throw Error(ErrorKind::dimension, "zero-sized axis in shape " + to_string(shape));
  }
  if (element_count(shape) != values) {
    throw Error(ErrorKind::dimension, "shape " + to_string(shape) + " does not hold " +
                                          std::to_string(values) + " values");
  }
}

const detail::Node& checked(const std::shared_ptr<detail::Node>& node) {
  if (!node) throw Error(ErrorKind::input, "use of an undefined tensor");
  return *node;
}

}  // namespace

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::vector<double> values(element_count(shape), value);
  return from(std::move(shape), std::move(values), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  validate_shape(shape, values.size());
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({1}, {value}, requires_grad); }

const Shape& Tensor::shape() const { return checked(node_).shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) {
    throw Error(ErrorKind::rank, "axis " + std::to_string(axis) + " out of range for " + to_string(s));
  }
  return s[axis];
}

std::size_t Tensor::size() const { return checked(node_).value.size(); }

std::span<const double> Tensor::data() const { return checked(node_).value; }

std::span<double> Tensor::mutable_data() {
  checked(node_);
  if (node_->owner != nullptr) {
    throw Error(ErrorKind::input, "cannot mutate a tensor recorded on a tape");
  }
  return node_->value;
}

double Tensor::item() const {
  if (size() != 1) throw Error(ErrorKind::rank, "item() on non-scalar " + to_string(shape()));
  return node_->value[0];
}

double Tensor::at(std::size_t i) const {
  const auto& v = checked(node_).value;
  if (i >= v.size()) throw Error(ErrorKind::dimension, "index out of range");
  return v[i];
}

double Tensor::at(std::size_t row, std::size_t col) const {
  if (rank() != 2) throw Error(ErrorKind::rank, "at(row, col) on " + to_string(shape()));
  const std::size_t cols = node_->shape[1];
  if (row >= node_->shape[0] || col >= cols) throw Error(ErrorKind::dimension, "index out of range");
  return node_->value[row * cols + col];
}

bool Tensor::requires_grad() const { return checked(node_).requires_grad; }

bool Tensor::has_grad() const { return !checked(node_).grad.empty(); }

std::span<const double> Tensor::grad() const { return checked(node_).grad; }

std::span<double> Tensor::mutable_grad() {
  checked(node_);
  return node_->ensure_grad();
}

void Tensor::zero_grad() {
  checked(node_);
  node_->grad.assign(node_->value.size(), 0.0);
}

// --- tape -------------------------------------------------------------------

namespace {
thread_local Tape* t_active = nullptr;
}

Tape* active_tape() { return t_active; }

TapeScope::TapeScope(Tape& tape) : previous_(t_active) { t_active = &tape; }

TapeScope::~TapeScope() { t_active = previous_; }

void Tape::record(std::shared_ptr<detail::Node> node) {
  if (consumed_) {
    throw Error(ErrorKind::input, "tape already ran backward; reset() before recording again");
  }
  node->owner = this;
  nodes_.push_back(std::move(node));
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined()) throw Error(ErrorKind::input, "backward on an undefined tensor");
  if (loss.size() != 1) {
    throw Error(ErrorKind::rank, "backward needs a scalar loss, got " + to_string(loss.shape()));
  }
  if (consumed_) throw Error(ErrorKind::input, "backward already ran on this tape");
  detail::Node* root = loss.node();
  if (!root->requires_grad) {
    consumed_ = true;
    return;
  }
  if (root->owner != this) {
    if (root->owner == nullptr) {
      root->ensure_grad()[0] += 1.0;  // loss is itself a parameter
      consumed_ = true;
      return;
    }
    throw Error(ErrorKind::input, "loss was not recorded on this tape");
  }
  consumed_ = true;
  auto it = std::find_if(nodes_.rbegin(), nodes_.rend(),
                         [root](const auto& n) { return n.get() == root; });
  root->grad.assign(1, 1.0);
  for (; it != nodes_.rend(); ++it) {
    detail::Node& node = **it;
    if (node.grad.empty() || !node.backward) continue;
    node.backward(node);
  }
}

void Tape::reset() {
  nodes_.clear();
  consumed_ = false;
}

}  // namespace asrk::tensor
