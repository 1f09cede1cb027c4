#include "asrk/rerankers/training.hpp"

#include <algorithm>
#include <cmath>

#include "asrk/errors.hpp"
#include "asrk/random.hpp"
#include "asrk/tensor/ops.hpp"

namespace asrk::rerankers {

using tensor::Tensor;

namespace {

std::vector<std::string> top_texts(const data::QuestionRecord& record, std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < record.candidates.size() && i <= k; ++i) out.push_back(record.candidates[i].text);
  return out;
}

std::optional<int> first_correct(const data::QuestionRecord& record, std::size_t limit) {
  for (std::size_t i = 0; i < record.candidates.size() && i < limit; ++i) {
    if (record.candidates[i].correct) return static_cast<int>(i);
  }
  return std::nullopt;
}

int label_of(bool correct) { return correct ? 1 : 0; }

// ASC cross-entropy over the real (unpadded) support pairs of every block.
struct AscTerm {
  std::vector<Tensor> logits;
  std::vector<int> labels;

  void add(const AsrCore& core, const SupportRepresentation& block, const data::QuestionRecord& record,
           std::size_t target, std::size_t top, AscScheme scheme) {
    std::size_t j = 0;
    for (std::size_t c = 0; c < top && j < block.pair_embeddings.size(); ++c) {
      if (c == target) continue;
      logits.push_back(core.asc_logits(block.pair_embeddings[j++]));
      labels.push_back(derive_asc_label(record.candidates[target].correct, record.candidates[c].correct, scheme));
    }
  }

  std::optional<Tensor> loss() const {
    if (logits.empty()) return std::nullopt;
    return tensor::cross_entropy(tensor::stack_rows(logits), labels);
  }
};

LossTerms combine(const Tensor& main, const std::optional<Tensor>& asc, double asc_weight) {
  LossTerms out;
  out.main = main.item();
  out.total = main;
  if (asc) {
    out.asc = asc->item();
    if (asc_weight != 0.0) out.total = tensor::add(main, tensor::scale(*asc, asc_weight));
  }
  return out;
}

void check_finite(double loss) {
  if (!std::isfinite(loss)) throw Error(ErrorKind::value, "training loss became non-finite");
}

// Shared loop: `loss_at(i, pass)` builds the loss of example i.
template <class LossFn>
TrainResult run_training(tensor::ParameterSet& all, tensor::ParameterSet& stepped, std::size_t n_examples,
                         LossFn&& loss_at, tensor::Optimizer& opt, const TrainOptions& options) {
  if (n_examples == 0) throw Error(ErrorKind::input, "training set is empty");
  if (options.batch_size == 0) throw Error(ErrorKind::config, "batch_size must be positive", "batch_size");
  TrainResult result;
  std::vector<std::size_t> order(n_examples);
  std::uint64_t example_counter = 0;
  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    for (std::size_t i = 0; i < n_examples; ++i) order[i] = i;
    Rng rng(derive_seed(options.seed, epoch));
    rng.shuffle(std::span<std::size_t>(order));

    EpochStats stats;
    stats.epoch = epoch;
    for (std::size_t start = 0; start < n_examples; start += options.batch_size) {
      const std::size_t end = std::min(n_examples, start + options.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      all.zero_grad();
      double step_loss = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        tensor::Tape tape;
        tensor::TapeScope scope(tape);
        Pass pass(options.training_mode, derive_seed(options.seed ^ 0xd5ull, example_counter++));
        const LossTerms terms = loss_at(order[b], pass);
        const double value = terms.total.item();
        check_finite(value);
        tape.backward(tensor::scale(terms.total, inv));
        step_loss += value * inv;
        stats.loss += value;
        stats.main_loss += terms.main;
        stats.asc_loss += terms.asc;
      }
      opt.step(stepped);
      ++result.steps;
      result.step_losses.push_back(step_loss);
    }
    const double n = static_cast<double>(n_examples);
    stats.examples = n_examples;
    stats.loss /= n;
    stats.main_loss /= n;
    stats.asc_loss /= n;
    result.epochs.push_back(stats);
    if (options.on_epoch && !options.on_epoch(stats)) {
      result.stopped_early = epoch < options.epochs;
      break;
    }
  }
  return result;
}

template <class Model, class LossFn>
TrainResult train_questions(Model& model, std::span<const data::QuestionRecord> questions, tensor::Optimizer& opt,
                            const TrainOptions& options, bool need_correct, LossFn&& loss) {
  if (questions.empty()) throw Error(ErrorKind::input, "training set is empty");
  std::vector<const data::QuestionRecord*> usable;
  std::size_t skipped = 0;
  for (const auto& q : questions) {
    if (q.candidates.empty() || (need_correct && !first_correct(q, model.config().k + 1))) {
      ++skipped;
    } else {
      usable.push_back(&q);
    }
  }
  if (usable.empty()) throw Error(ErrorKind::input, "no training question has a usable correct candidate");
  auto result = run_training(
      model.params(), model.params(), usable.size(),
      [&](std::size_t i, Pass& pass) { return loss(*usable[i], pass); }, opt, options);
  result.skipped = skipped;
  return result;
}

}  // namespace

LossTerms pointwise_loss(const PointwiseModel& model, std::string_view question, const data::Candidate& candidate,
                         Pass& pass) {
  const int label = label_of(candidate.correct);
  return combine(tensor::cross_entropy(model.logits(question, candidate.text, pass), std::span(&label, 1)),
                 std::nullopt, 0.0);
}

std::optional<LossTerms> multiclassifier_loss(const MultiClassifierModel& model, const data::QuestionRecord& record,
                                              Pass& pass) {
  const std::size_t slots = model.config().k + 1;
  const auto target = first_correct(record, slots);
  if (!target) return std::nullopt;
  auto texts = top_texts(record, model.config().k);
  texts.resize(slots);
  const int label = *target;
  return combine(tensor::cross_entropy(model.logits(record.question, texts, pass), std::span(&label, 1)),
                 std::nullopt, 0.0);
}

LossTerms pairwise_loss(const PairwiseModel& model, const data::QuestionRecord& record, Pass& pass) {
  const auto texts = top_texts(record, model.config().k);
  std::vector<Tensor> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    rows.push_back(model.logits(record.question, texts[i], support_for(texts, i, model.config().k), pass));
    labels.push_back(label_of(record.candidates[i].correct));
  }
  return combine(tensor::cross_entropy(tensor::stack_rows(rows), labels), std::nullopt, 0.0);
}

LossTerms asr_loss(const AsrModel& model, const data::QuestionRecord& record, double asc_weight, Pass& pass) {
  const auto texts = top_texts(record, model.config().k);
  std::vector<Tensor> rows;
  std::vector<int> labels;
  AscTerm asc;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto block = model.represent(record.question, texts[i], support_for(texts, i, model.config().k), pass);
    rows.push_back(model.joint_logits(block.v));
    labels.push_back(label_of(record.candidates[i].correct));
    if (asc_weight != 0.0) asc.add(model.core(), block, record, i, texts.size(), model.config().scheme);
  }
  return combine(tensor::cross_entropy(tensor::stack_rows(rows), labels), asc.loss(), asc_weight);
}

std::optional<LossTerms> masr_loss(const MasrModel& model, const data::QuestionRecord& record, double asc_weight,
                                   Pass& pass) {
  const auto texts = top_texts(record, model.config().k);
  const auto target = first_correct(record, texts.size());
  if (!target) return std::nullopt;
  const auto list = model.list_logits(record.question, texts, pass);
  AscTerm asc;
  if (asc_weight != 0.0) {
    for (std::size_t i = 0; i < texts.size(); ++i) {
      asc.add(model.core(), list.blocks[i], record, i, texts.size(), model.config().scheme);
    }
  }
  const int label = *target;
  return combine(tensor::cross_entropy(list.logits, std::span(&label, 1)), asc.loss(), asc_weight);
}

LossTerms asc_loss(const AsrCore& core, const data::FeverRecord& record, Pass& pass) {
  const int label = static_cast<int>(record.label);
  const Tensor logits = core.asc_logits(core.asc_embedding(record.claim, record.evidence, pass));
  return combine(tensor::cross_entropy(logits, std::span(&label, 1)), std::nullopt, 0.0);
}

TrainResult train_pointwise(PointwiseModel& model, std::span<const data::QuestionRecord> questions,
                            tensor::Optimizer& opt, const TrainOptions& options) {
  std::vector<std::pair<const data::QuestionRecord*, const data::Candidate*>> pairs;
  for (const auto& q : questions) {
    for (const auto& c : q.candidates) pairs.emplace_back(&q, &c);
  }
  return run_training(
      model.params(), model.params(), pairs.size(),
      [&](std::size_t i, Pass& pass) { return pointwise_loss(model, pairs[i].first->question, *pairs[i].second, pass); },
      opt, options);
}

TrainResult train_multiclassifier(MultiClassifierModel& model, std::span<const data::QuestionRecord> questions,
                                  tensor::Optimizer& opt, const TrainOptions& options) {
  return train_questions(model, questions, opt, options, true,
                         [&](const data::QuestionRecord& q, Pass& pass) { return *multiclassifier_loss(model, q, pass); });
}

TrainResult train_pairwise(PairwiseModel& model, std::span<const data::QuestionRecord> questions,
                           tensor::Optimizer& opt, const TrainOptions& options) {
  return train_questions(model, questions, opt, options, false,
                         [&](const data::QuestionRecord& q, Pass& pass) { return pairwise_loss(model, q, pass); });
}

TrainResult train_asr(AsrModel& model, std::span<const data::QuestionRecord> questions, tensor::Optimizer& opt,
                      const TrainOptions& options) {
  return train_questions(model, questions, opt, options, false, [&](const data::QuestionRecord& q, Pass& pass) {
    return asr_loss(model, q, options.asc_weight, pass);
  });
}

TrainResult train_masr(MasrModel& model, std::span<const data::QuestionRecord> questions, tensor::Optimizer& opt,
                       const TrainOptions& options) {
  return train_questions(model, questions, opt, options, true, [&](const data::QuestionRecord& q, Pass& pass) {
    return *masr_loss(model, q, options.asc_weight, pass);
  });
}

TrainResult train_model(RerankerModel& model, std::span<const data::QuestionRecord> questions,
                        tensor::Optimizer& opt, const TrainOptions& options) {
  return std::visit(
      [&](auto& m) -> TrainResult {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, PointwiseModel>) return train_pointwise(m, questions, opt, options);
        if constexpr (std::is_same_v<M, MultiClassifierModel>) return train_multiclassifier(m, questions, opt, options);
        if constexpr (std::is_same_v<M, PairwiseModel>) return train_pairwise(m, questions, opt, options);
        if constexpr (std::is_same_v<M, AsrModel>) return train_asr(m, questions, opt, options);
        if constexpr (std::is_same_v<M, MasrModel>) return train_masr(m, questions, opt, options);
      },
      model);
}

namespace {

const AsrCore& core_of(const RerankerModel& model) {
  if (const auto* asr = std::get_if<AsrModel>(&model)) return asr->core();
  if (const auto* masr = std::get_if<MasrModel>(&model)) return masr->core();
  throw Error(ErrorKind::incompatibility,
              "model kind " + std::string(to_string(base_of(model).config().kind)) + " has no answer support classifier");
}

}  // namespace

TrainResult pretrain_asc(RerankerModel& model, std::span<const data::FeverRecord> records, tensor::Optimizer& opt,
                         const TrainOptions& options) {
  const AsrCore& core = core_of(model);
  ModelBase& base = base_of(model);
  if (base.config().scheme != AscScheme::fever_three_way) {
    throw Error(ErrorKind::incompatibility, "ASC pretraining needs the fever_three_way scheme, model uses " +
                                                std::string(to_string(base.config().scheme)));
  }
  auto asc_params = base.params().subset("asc.");
  return run_training(
      base.params(), asc_params, records.size(),
      [&](std::size_t i, Pass& pass) { return asc_loss(core, records[i], pass); }, opt, options);
}

double asc_accuracy(const RerankerModel& model, std::span<const data::FeverRecord> records) {
  if (records.empty()) throw Error(ErrorKind::input, "no ASC records to score");
  const AsrCore& core = core_of(model);
  std::size_t hits = 0;
  for (const auto& r : records) {
    Pass pass;
    const Tensor logits = core.asc_logits(core.asc_embedding(r.claim, r.evidence, pass));
    const auto values = logits.data();
    const auto best = static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
    hits += best == static_cast<int>(r.label) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

}  // namespace asrk::rerankers
