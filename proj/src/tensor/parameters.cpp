#include "asrk/tensor/parameters.hpp"

#include <cmath>

#include "asrk/errors.hpp"

namespace asrk::tensor {

Tensor& ParameterSet::add(std::string name, Tensor tensor) {
  if (index_.contains(name)) throw Error(ErrorKind::config, "duplicate parameter name '" + name + "'");
  if (!tensor.requires_grad()) {
    auto node = tensor.handle();
    node->requires_grad = true;
  }
  index_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), std::move(tensor)});
  return entries_.back().tensor;
}

void ParameterSet::adopt(const std::string& name, const Tensor& tensor) {
  if (index_.contains(name)) throw Error(ErrorKind::config, "duplicate parameter name '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.push_back({name, tensor});
}

bool ParameterSet::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

const Tensor& ParameterSet::at(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorKind::config, "unknown parameter '" + std::string(name) + "'");
  return entries_[it->second].tensor;
}

Tensor& ParameterSet::at(std::string_view name) {
  return const_cast<Tensor&>(static_cast<const ParameterSet&>(*this).at(name));
}

ParameterSet ParameterSet::subset(std::string_view prefix) const {
  ParameterSet out;
  for (const auto& e : entries_) {
    if (std::string_view(e.name).starts_with(prefix)) out.adopt(e.name, e.tensor);
  }
  return out;
}

ParameterSet ParameterSet::subset_excluding(std::string_view prefix) const {
  ParameterSet out;
  for (const auto& e : entries_) {
    if (!std::string_view(e.name).starts_with(prefix)) out.adopt(e.name, e.tensor);
  }
  return out;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

std::vector<std::vector<double>> ParameterSet::snapshot() const {
  std::vector<std::vector<double>> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.emplace_back(e.tensor.data().begin(), e.tensor.data().end());
  return out;
}

void ParameterSet::restore(const std::vector<std::vector<double>>& values) {
  if (values.size() != entries_.size()) {
    throw Error(ErrorKind::incompatibility, "snapshot has " + std::to_string(values.size()) +
                                                " tensors, parameter set has " +
                                                std::to_string(entries_.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto dst = entries_[i].tensor.mutable_data();
    if (dst.size() != values[i].size()) {
      throw Error(ErrorKind::incompatibility, "snapshot size mismatch for '" + entries_[i].name + "'");
    }
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {
  if (!(config_.learning_rate > 0.0)) {
    throw Error(ErrorKind::config, "learning rate must be positive");
  }
}

void Optimizer::step(ParameterSet& params) {
  for (const auto& e : params) {
    if (!e.tensor.has_grad()) {
      throw Error(ErrorKind::unstepped_parameter, "parameter '" + e.name + "' has no gradient");
    }
  }
  ++steps_;
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerKind::sgd) {
    for (auto& e : params) {
      auto w = e.tensor.mutable_data();
      const auto g = e.tensor.grad();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
    }
    return;
  }
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (auto& e : params) {
    auto w = e.tensor.mutable_data();
    const auto g = e.tensor.grad();
    auto [it, inserted] = moments_.try_emplace(e.name);
    Moments& m = it->second;
    if (inserted) {
      m.first.assign(w.size(), 0.0);
      m.second.assign(w.size(), 0.0);
    } else if (m.first.size() != w.size()) {
      throw Error(ErrorKind::incompatibility, "moment shape mismatch for '" + e.name + "'");
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      m.first[i] = b1 * m.first[i] + (1.0 - b1) * g[i];
      m.second[i] = b2 * m.second[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = m.first[i] / c1;
      const double vhat = m.second[i] / c2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + config_.epsilon);
    }
  }
}

}  // namespace asrk::tensor
