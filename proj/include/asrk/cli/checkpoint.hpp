#pragma once

// Binary container:
//   "ASRK1"
//   u64 length + config text (ExperimentConfig::serialize)
//   u64 length + vocabulary text
//   u64 tensor count, then per tensor:
//     u64 name length + name, u64 rank, rank × u64 dims, raw f64 values
// All integers and floats little-endian.

#include <filesystem>
#include <iosfwd>
#include <memory>

#include "asrk/cli/config.hpp"
#include "asrk/encoder/vocabulary.hpp"
#include "asrk/rerankers/models.hpp"

namespace asrk::cli {

inline constexpr char kCheckpointMagic[] = "ASRK1";

struct Checkpoint {
  ExperimentConfig config;
  std::shared_ptr<const encoder::Vocabulary> vocab;
  rerankers::RerankerModel model;
};

void write_checkpoint(std::ostream& out, const ExperimentConfig& config, const rerankers::RerankerModel& model);
void save_checkpoint(const std::filesystem::path& path, const ExperimentConfig& config,
                     const rerankers::RerankerModel& model);

// Rebuilds the model from the stored config and vocabulary, then fills in
// every tensor. Missing, extra or misshapen tensors raise parse error.
Checkpoint read_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies every parameter of `from` into `to` by name. Throws
// incompatibility error if names or shapes differ.
void copy_parameters(const tensor::ParameterSet& from, tensor::ParameterSet& to);

}  // namespace asrk::cli
