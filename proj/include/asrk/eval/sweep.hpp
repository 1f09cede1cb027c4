#pragma once

#include <span>
#include <vector>

#include "asrk/errors.hpp"
#include "asrk/eval/metrics.hpp"

namespace asrk::eval {

struct SweepRow {
  std::size_t k = 0;
  double metric = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // in the order of `ks`
  std::size_t selected_k = 0;
  double selected_metric = 0.0;
};

// Best row: highest metric, smallest k among ties.
inline void select_best(SweepResult& result) {
  const SweepRow* best = nullptr;
  for (const auto& row : result.rows) {
    if (!best || row.metric > best->metric || (row.metric == best->metric && row.k < best->k)) best = &row;
  }
  result.selected_k = best->k;
  result.selected_metric = best->metric;
}

// trainer(k) returns a trained model; dev_run_builder(model) scores the dev
// split with it.
template <class Trainer, class RunBuilder>
SweepResult sweep_k(Trainer&& trainer, RunBuilder&& dev_run_builder, std::span<const std::size_t> ks,
                    Metric metric = Metric::map) {
  if (ks.empty()) throw Error(ErrorKind::input, "sweep needs at least one k");
  SweepResult result;
  for (std::size_t k : ks) {
    auto model = trainer(k);
    const RunResult run = dev_run_builder(model);
    result.rows.push_back({k, metric_value(run, metric)});
  }
  select_best(result);
  return result;
}

}  // namespace asrk::eval
