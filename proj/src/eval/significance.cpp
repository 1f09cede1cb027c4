#include "asrk/eval/significance.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>
#include <unordered_map>

#include "asrk/errors.hpp"
#include "asrk/random.hpp"

namespace asrk::eval {

namespace {

constexpr std::size_t kChunk = 10000;

std::size_t count_chunk(std::span<const double> diff, double threshold, std::size_t trials, std::uint64_t seed) {
  Rng rng(seed);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    double total = 0.0;
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < diff.size(); ++i) {
      if (i % 64 == 0) bits = rng.next();
      total += (bits & 1) ? -diff[i] : diff[i];
      bits >>= 1;
    }
    if (std::abs(total) >= threshold) ++hits;
  }
  return hits;
}

}  // namespace

RandomizationResult randomization_test(std::span<const double> a, std::span<const double> b, std::size_t trials,
                                       std::uint64_t seed, std::size_t threads) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::alignment, "paired values differ in length: " + std::to_string(a.size()) + " vs " +
                                          std::to_string(b.size()));
  }
  if (a.empty()) throw Error(ErrorKind::input, "randomization test needs at least one question");
  if (trials == 0) throw Error(ErrorKind::config, "trials must be positive", "trials");

  std::vector<double> diff(a.size());
  double sum_a = 0.0, sum_b = 0.0, observed_sum = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff[i] = a[i] - b[i];
    sum_a += a[i];
    sum_b += b[i];
    observed_sum += diff[i];
    scale += std::abs(diff[i]);
  }
  const double n = static_cast<double>(a.size());
  const double observed = std::abs(observed_sum);
  // Sums are compared unnormalised; the slack absorbs reassociation error.
  const double threshold = observed - 1e-12 * std::max(1.0, scale);

  const std::size_t chunks = (trials + kChunk - 1) / kChunk;
  std::vector<std::size_t> hits(chunks, 0);
  auto run_chunk = [&](std::size_t c) {
    const std::size_t count = std::min(kChunk, trials - c * kChunk);
    hits[c] = count_chunk(diff, threshold, count, derive_seed(seed, c));
  };
  threads = std::clamp<std::size_t>(threads, 1, chunks);
  if (threads == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t c = w; c < chunks; c += threads) run_chunk(c);
      });
    }
    for (auto& t : workers) t.join();
  }
  std::size_t total_hits = 0;
  for (std::size_t h : hits) total_hits += h;

  RandomizationResult out;
  out.metric_a = sum_a / n;
  out.metric_b = sum_b / n;
  out.observed = observed / n;
  out.trials = trials;
  out.p_value = static_cast<double>(1 + total_hits) / static_cast<double>(1 + trials);
  return out;
}

RandomizationResult randomization_test(const RunResult& a, const RunResult& b, Metric metric, std::size_t trials,
                                       std::uint64_t seed, std::size_t threads) {
  std::unordered_map<std::string, std::size_t> index_b;
  for (std::size_t i = 0; i < b.questions.size(); ++i) {
    if (!index_b.emplace(b.questions[i].id, i).second) {
      throw Error(ErrorKind::alignment, "run B repeats question '" + b.questions[i].id + "'");
    }
  }
  std::set<std::string> ids_a;
  for (const auto& q : a.questions) {
    if (!ids_a.insert(q.id).second) throw Error(ErrorKind::alignment, "run A repeats question '" + q.id + "'");
  }
  std::vector<std::string> only_a, only_b;
  for (const auto& id : ids_a) {
    if (!index_b.count(id)) only_a.push_back(id);
  }
  for (const auto& q : b.questions) {
    if (!ids_a.count(q.id)) only_b.push_back(q.id);
  }
  if (!only_a.empty() || !only_b.empty()) {
    std::string message = "runs cover different questions;";
    auto list = [&](const char* label, const std::vector<std::string>& ids) {
      if (ids.empty()) return;
      message += std::string(" only in ") + label + ":";
      for (std::size_t i = 0; i < ids.size() && i < 10; ++i) message += " " + ids[i];
      if (ids.size() > 10) message += " (+" + std::to_string(ids.size() - 10) + " more)";
    };
    list("A", only_a);
    list("B", only_b);
    throw Error(ErrorKind::alignment, message);
  }
  RunResult aligned_b;
  for (const auto& q : a.questions) aligned_b.questions.push_back(b.questions[index_b.at(q.id)]);
  const auto va = per_question(a, metric);
  const auto vb = per_question(aligned_b, metric);
  return randomization_test(va, vb, trials, seed, threads);
}

double ks_statistic(std::vector<double> samples) {
  if (samples.empty()) throw Error(ErrorKind::input, "KS statistic needs samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double x = std::clamp(samples[i], 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - x, x - static_cast<double>(i) / n});
  }
  return d;
}

double ks_uniform_pvalue(std::vector<double> samples) {
  const double n = static_cast<double>(samples.size());
  const double d = ks_statistic(std::move(samples));
  const double root = std::sqrt(n);
  const double lambda = (root + 0.12 + 0.11 / root) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace asrk::eval
