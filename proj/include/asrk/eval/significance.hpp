#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "asrk/eval/metrics.hpp"

namespace asrk::eval {

struct RandomizationResult {
  double metric_a = 0.0;
  double metric_b = 0.0;
  double observed = 0.0;  // |metric_a - metric_b|
  double p_value = 1.0;
  std::size_t trials = 0;
};

// Paired approximate randomization over per-question metric values. Each
// trial swaps the two systems' outputs of every question with probability
// 1/2; p = (1 + #{trial >= observed}) / (1 + trials). Trials run in fixed
// chunks with their own seeds, so the result does not depend on `threads`.
// Questions are matched by id; mismatched sets raise alignment error.
RandomizationResult randomization_test(const RunResult& a, const RunResult& b, Metric metric,
                                       std::size_t trials = 100000, std::uint64_t seed = 0,
                                       std::size_t threads = 1);

// Same test on already aligned per-question values.
RandomizationResult randomization_test(std::span<const double> a, std::span<const double> b,
                                       std::size_t trials = 100000, std::uint64_t seed = 0,
                                       std::size_t threads = 1);

// One-sample Kolmogorov-Smirnov statistic against U(0,1) and its asymptotic
// p-value with the small-sample correction of Stephens.
double ks_statistic(std::vector<double> samples);
double ks_uniform_pvalue(std::vector<double> samples);

}  // namespace asrk::eval
