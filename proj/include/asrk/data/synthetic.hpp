#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asrk/data/dataset.hpp"

namespace asrk::data {

// Token grammar:
//   question  = "what rel<r> of tp<x> ?" + fillers
//   candidate = "tp<x>" + fillers + answer token + fillers + evidence token
// Correct candidates carry ans<r> with probability answer_hit, distractors
// with probability distractor_hit (another ans token otherwise). Each
// question draws a latent evidence token ev<e>; correct candidates carry it
// with probability support_strength and a uniform evidence token otherwise.
// Distractors always draw a uniform evidence token.
struct SyntheticConfig {
  std::size_t n_questions = 20;
  std::size_t n_candidates = 4;
  double support_strength = 0.9;
  std::size_t topics = 40;
  std::size_t relations = 4;
  std::size_t evidence_tokens = 6;
  std::size_t fillers = 30;
  std::size_t max_fillers = 1;  // per filler slot
  double answer_hit = 0.7;
  double distractor_hit = 0.4;
  std::string id_prefix = "q";

  void validate() const;
};

std::vector<QuestionRecord> generate_synthetic(std::uint64_t seed, const SyntheticConfig& config);
std::vector<QuestionRecord> generate_synthetic(std::uint64_t seed, std::size_t n_questions,
                                               std::size_t n_candidates, double support_strength);

// Every ordered (t, c) candidate pair of freshly generated questions,
// claim = t, evidence = c, labelled with the three-way scheme.
std::vector<FeverRecord> generate_synthetic_fever(std::uint64_t seed, const SyntheticConfig& config);

FeverLabel fever_label_for(int three_way_class);

}  // namespace asrk::data
