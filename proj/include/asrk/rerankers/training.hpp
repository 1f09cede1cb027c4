#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "asrk/data/dataset.hpp"
#include "asrk/rerankers/models.hpp"
#include "asrk/tensor/parameters.hpp"

namespace asrk::rerankers {

// Training examples are questions for the joint models and (question,
// candidate) pairs for the pointwise model. Gradients of batch_size
// examples are averaged before each optimizer step.
struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;
  double main_loss = 0.0;
  double asc_loss = 0.0;
  std::size_t examples = 0;
};

struct TrainOptions {
  std::size_t epochs = 20;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
  double asc_weight = 1.0;
  bool training_mode = true;  // dropout active
  // Called after every epoch; returning false stops training.
  std::function<bool(const EpochStats&)> on_epoch;
};

struct TrainResult {
  std::vector<double> step_losses;
  std::vector<EpochStats> epochs;
  std::size_t skipped = 0;  // questions without a usable correct candidate
  std::size_t steps = 0;
  bool stopped_early = false;
};

struct LossTerms {
  tensor::Tensor total;
  double main = 0.0;
  double asc = 0.0;
};

// Per-example losses. The question-level ones look at the first k+1
// candidates; ASC terms skip padded support entries. nullopt means the
// example has no usable target.
LossTerms pointwise_loss(const PointwiseModel& model, std::string_view question, const data::Candidate& candidate,
                         Pass& pass);
std::optional<LossTerms> multiclassifier_loss(const MultiClassifierModel& model, const data::QuestionRecord& record,
                                              Pass& pass);
LossTerms pairwise_loss(const PairwiseModel& model, const data::QuestionRecord& record, Pass& pass);
LossTerms asr_loss(const AsrModel& model, const data::QuestionRecord& record, double asc_weight, Pass& pass);
std::optional<LossTerms> masr_loss(const MasrModel& model, const data::QuestionRecord& record, double asc_weight,
                                   Pass& pass);
LossTerms asc_loss(const AsrCore& core, const data::FeverRecord& record, Pass& pass);

TrainResult train_pointwise(PointwiseModel& model, std::span<const data::QuestionRecord> questions,
                            tensor::Optimizer& opt, const TrainOptions& options);
TrainResult train_multiclassifier(MultiClassifierModel& model, std::span<const data::QuestionRecord> questions,
                                  tensor::Optimizer& opt, const TrainOptions& options);
TrainResult train_pairwise(PairwiseModel& model, std::span<const data::QuestionRecord> questions,
                           tensor::Optimizer& opt, const TrainOptions& options);
TrainResult train_asr(AsrModel& model, std::span<const data::QuestionRecord> questions, tensor::Optimizer& opt,
                      const TrainOptions& options);
TrainResult train_masr(MasrModel& model, std::span<const data::QuestionRecord> questions, tensor::Optimizer& opt,
                       const TrainOptions& options);
TrainResult train_model(RerankerModel& model, std::span<const data::QuestionRecord> questions,
                        tensor::Optimizer& opt, const TrainOptions& options);

// Updates only the asc.* parameters from three-way labelled pairs. Throws
// incompatibility error unless the model uses the fever_three_way scheme.
TrainResult pretrain_asc(RerankerModel& model, std::span<const data::FeverRecord> records, tensor::Optimizer& opt,
                         const TrainOptions& options);

// Fraction of records whose argmax ASC class equals the label.
double asc_accuracy(const RerankerModel& model, std::span<const data::FeverRecord> records);

}  // namespace asrk::rerankers
