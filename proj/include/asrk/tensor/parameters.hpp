#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "asrk/tensor/tensor.hpp"

namespace asrk::tensor {

// Named trainable tensors in insertion order.
class ParameterSet {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
  };

  // Adds a requires_grad leaf; throws config error on a duplicate name.
  Tensor& add(std::string name, Tensor tensor);
  // Adds an existing handle (shared with another set).
  void adopt(const std::string& name, const Tensor& tensor);

  bool contains(std::string_view name) const;
  const Tensor& at(std::string_view name) const;
  Tensor& at(std::string_view name);

  // Entries whose name starts with `prefix`; handles are shared.
  ParameterSet subset(std::string_view prefix) const;
  ParameterSet subset_excluding(std::string_view prefix) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }

  void zero_grad();

  // Deep copy of all values, in order.
  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& values);

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

enum class OptimizerKind { adam, sgd };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config);

  // One update of every parameter in `params` from its accumulated gradient.
  // Throws unstepped-parameter error if a parameter has no gradient buffer.
  void step(ParameterSet& params);

  const OptimizerConfig& config() const { return config_; }
  std::uint64_t steps() const { return steps_; }
  bool has_moments() const { return !moments_.empty(); }

 private:
  struct Moments {
    std::vector<double> first;
    std::vector<double> second;
  };

  OptimizerConfig config_;
  std::uint64_t steps_ = 0;
  std::map<std::string, Moments, std::less<>> moments_;
};

}  // namespace asrk::tensor
