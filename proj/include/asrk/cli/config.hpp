#pragma once

// Flat `key = value` experiment configuration. Blank lines and lines
// starting with '#' are ignored; trailing "# ..." comments are stripped.

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>

#include "asrk/data/synthetic.hpp"
#include "asrk/encoder/encoder.hpp"
#include "asrk/rerankers/models.hpp"
#include "asrk/tensor/parameters.hpp"

namespace asrk::cli {

enum class ExperimentKind { pointwise, multiclassifier, pairwise, asr, masr, masr_f, masr_fp };

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view text);

struct ExperimentConfig {
  ExperimentKind model = ExperimentKind::pointwise;
  encoder::EncoderConfig encoder;
  std::optional<std::size_t> k;                   // default depends on the model
  std::optional<rerankers::AscScheme> asc_scheme;  // default depends on the model
  double asc_weight = 1.0;
  double head_init_std = 0.0;
  tensor::OptimizerKind optimizer = tensor::OptimizerKind::adam;
  std::optional<double> learning_rate;  // default depends on the model
  std::size_t epochs = 20;
  std::size_t batch_size = 8;
  std::size_t patience = 3;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  std::string train_path;
  std::string dev_path;
  std::string test_path;
  std::string fever_path;
  std::string init_checkpoint;

  std::size_t pretrain_epochs = 5;
  std::optional<double> pretrain_learning_rate;  // defaults to learning_rate
  double pretrain_holdout = 0.1;

  data::SyntheticConfig synthetic;
  std::size_t synthetic_train = 300;
  std::size_t synthetic_dev = 100;
  std::size_t synthetic_test = 100;
  std::size_t synthetic_fever = 300;  // questions expanded into FEVER pairs

  std::size_t resolved_k() const;
  rerankers::AscScheme resolved_scheme() const;
  double resolved_learning_rate() const;
  double resolved_pretrain_learning_rate() const;
  rerankers::ModelConfig model_config() const;
  tensor::OptimizerConfig optimizer_config() const;
  tensor::OptimizerConfig pretrain_optimizer_config() const;

  // Throws config error whose code names the violated rule.
  void validate() const;

  // Canonical text: every key in a fixed order, doubles with 17 digits.
  std::string serialize() const;
};

// Parses and validates. Unknown keys raise config error "unknown_key",
// malformed values "bad_value" (both naming the line).
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config(const std::string& path);

// Applies one `key = value` assignment.
void set_option(ExperimentConfig& config, std::string_view key, std::string_view value);

}  // namespace asrk::cli
