#pragma once

// Inference entry points. None of these record on a tape, so a frozen model
// can serve several threads at once.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asrk/data/dataset.hpp"
#include "asrk/rerankers/models.hpp"

namespace asrk::rerankers {

struct CandidateScore {
  std::size_t index = 0;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based
};

// Sorted by score descending, ties by ascending index.
std::vector<CandidateScore> rank_scores(std::span<const double> scores);

double pr_score(const PointwiseModel& model, std::string_view question, std::string_view candidate);

// Pads with empty candidates up to k+1 and returns k+1 probabilities.
// Throws input error for zero candidates, config error for more than k+1.
std::vector<double> multiclassifier_score(const MultiClassifierModel& model, std::string_view question,
                                          std::span<const std::string> candidates);

double pairwise_score(const PairwiseModel& model, std::string_view question, std::string_view target,
                      std::span<const std::string> others);

std::vector<double> asc_classify(const AsrModel& model, std::string_view target, std::string_view candidate,
                                 AscScheme scheme);
std::vector<double> asc_classify(const MasrModel& model, std::string_view target, std::string_view candidate,
                                 AscScheme scheme);

struct AsrOutput {
  double probability = 0.0;
  tensor::Tensor v;
};
AsrOutput asr_forward(const AsrModel& model, std::string_view question, std::string_view target,
                      std::span<const std::string> support);

// Candidates in upstream order, at most k+1. Each target is scored against
// the others, padded to k.
std::vector<CandidateScore> asr_rank(const AsrModel& model, std::string_view question,
                                     std::span<const std::string> candidates);

// Exactly k+1 candidates.
std::vector<double> masr_forward(const MasrModel& model, std::string_view question,
                                 std::span<const std::string> candidates);

// One score per candidate of `record`, in file order. Candidates outside
// the top k+1 of the joint models score -(index + 1) so they stay below
// the reranked block in their upstream order.
std::vector<double> score_question(const RerankerModel& model, const data::QuestionRecord& record);

// score_question over many questions, split across `threads` workers.
std::vector<std::vector<double>> score_questions(const RerankerModel& model,
                                                 std::span<const data::QuestionRecord> records,
                                                 std::size_t threads = 1);

}  // namespace asrk::rerankers
