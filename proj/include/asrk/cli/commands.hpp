#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "asrk/cli/checkpoint.hpp"
#include "asrk/cli/config.hpp"
#include "asrk/data/dataset.hpp"
#include "asrk/eval/metrics.hpp"
#include "asrk/eval/significance.hpp"
#include "asrk/eval/sweep.hpp"
#include "asrk/rerankers/training.hpp"

namespace asrk::cli {

struct EpochRecord {
  rerankers::EpochStats stats;
  std::optional<eval::MetricReport> dev;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 0 = initial model
  std::optional<eval::MetricReport> best_dev;
  std::optional<eval::MetricReport> test;
  std::optional<eval::RunResult> test_run;
  std::optional<double> pretrain_accuracy;  // masr_fp inline pretraining, on all FEVER pairs
  std::size_t skipped = 0;
  std::size_t steps = 0;
};

// Trains the configured model. With a dev set, keeps the parameters of the
// epoch with the highest dev MAP and stops after `patience` epochs without
// improvement. Writes model.ckpt and metrics.tsv into out_dir, plus
// test_run.tsv when a test set is configured.
TrainReport cmd_train(const ExperimentConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

// In-memory variant used by cmd_train and cmd_sweep_k.
struct Trained {
  rerankers::RerankerModel model;
  TrainReport report;
};
Trained train_experiment(const ExperimentConfig& config, std::ostream* log);

struct PretrainReport {
  std::vector<rerankers::EpochStats> epochs;
  double heldout_accuracy = 0.0;
  std::size_t train_pairs = 0;
  std::size_t heldout_pairs = 0;
};

// Fits only the ASC parameters on FEVER pairs, holding out a fixed
// fraction for accuracy. Writes asc.ckpt. Four-way models raise
// incompatibility error.
PretrainReport cmd_pretrain_asc(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                                std::ostream& log);

struct EvaluateOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path data;
  std::optional<std::filesystem::path> vocab;  // must match the checkpoint's
  data::SplitFilter filter = data::SplitFilter::eval_convention;
  std::size_t threads = 1;
};

struct EvaluateReport {
  eval::MetricReport metrics;
  eval::RunResult run;
  std::size_t filtered_out = 0;
};

// Writes run.tsv into out_dir.
EvaluateReport cmd_evaluate(const EvaluateOptions& options, const std::filesystem::path& out_dir, std::ostream& log);

// Scores `records` with a loaded model; vocabulary mismatch between
// `records` and the model raises incompatibility error.
eval::RunResult evaluate_model(const rerankers::RerankerModel& model,
                               std::span<const data::QuestionRecord> records, std::size_t threads);

struct CompareOptions {
  std::filesystem::path run_a;
  std::filesystem::path run_b;
  eval::Metric metric = eval::Metric::p_at_1;
  std::size_t trials = 100000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

eval::RandomizationResult cmd_compare(const CompareOptions& options, std::ostream& log);

struct SweepReport {
  eval::SweepResult sweep;
  double baseline = 0.0;  // pointwise dev metric
  eval::Metric metric = eval::Metric::map;
};

// Trains the configured model once per k and a pointwise baseline, all
// scored on the dev set; writes sweep.tsv with (k, metric, improvement %).
SweepReport cmd_sweep_k(const ExperimentConfig& config, std::span<const std::size_t> ks, eval::Metric metric,
                        const std::filesystem::path& out_dir, std::ostream& log);

// Writes train.tsv, dev.tsv, test.tsv and fever.jsonl.
void cmd_generate_synthetic(const ExperimentConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

// Vocabulary over the training text plus any FEVER text.
encoder::Vocabulary experiment_vocab(std::span<const data::QuestionRecord> train,
                                     std::span<const data::FeverRecord> fever, std::size_t max_size);

// rerankers::ModelConfig equality on the fields that determine parameter
// shapes and semantics.
bool same_architecture(const rerankers::ModelConfig& a, const rerankers::ModelConfig& b);

}  // namespace asrk::cli
