#include "asrk/rerankers/scoring.hpp"

#include <algorithm>
#include <numeric>
#include <thread>

#include "asrk/errors.hpp"
#include "asrk/tensor/ops.hpp"

namespace asrk::rerankers {

using tensor::Tensor;

namespace {

std::vector<double> probabilities(const Tensor& logits) {
  const Tensor p = tensor::softmax(logits);
  return {p.data().begin(), p.data().end()};
}

double correct_probability(const Tensor& logits) { return tensor::softmax(logits).at(1); }

std::vector<std::string> texts_of(const data::QuestionRecord& record, std::size_t limit) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < record.candidates.size() && i < limit; ++i) out.push_back(record.candidates[i].text);
  return out;
}

void check_scheme(const ModelBase& model, AscScheme scheme) {
  if (model.config().scheme != scheme) {
    throw Error(ErrorKind::config,
                "ASC head was built for " + std::string(to_string(model.config().scheme)) + ", asked for " +
                    std::string(to_string(scheme)),
                "asc_scheme");
  }
}

std::vector<double> tail_scores(std::vector<double> head, std::size_t total) {
  for (std::size_t i = head.size(); i < total; ++i) head.push_back(-static_cast<double>(i + 1));
  return head;
}

}  // namespace

std::vector<CandidateScore> rank_scores(std::span<const double> scores) {
  std::vector<CandidateScore> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = {i, scores[i], 0};
  std::stable_sort(out.begin(), out.end(),
                   [](const CandidateScore& a, const CandidateScore& b) { return a.score > b.score; });
  for (std::size_t r = 0; r < out.size(); ++r) out[r].rank = r + 1;
  return out;
}

double pr_score(const PointwiseModel& model, std::string_view question, std::string_view candidate) {
  Pass pass;
  return correct_probability(model.logits(question, candidate, pass));
}

std::vector<double> multiclassifier_score(const MultiClassifierModel& model, std::string_view question,
                                          std::span<const std::string> candidates) {
  if (candidates.empty()) throw Error(ErrorKind::input, "multi-classifier needs at least one candidate");
  const std::size_t slots = model.config().k + 1;
  if (candidates.size() > slots) {
    throw Error(ErrorKind::config, "multi-classifier holds " + std::to_string(slots) + " candidates, got " +
                                       std::to_string(candidates.size()),
                "k");
  }
  std::vector<std::string> padded(candidates.begin(), candidates.end());
  padded.resize(slots);
  Pass pass;
  return probabilities(model.logits(question, padded, pass));
}

double pairwise_score(const PairwiseModel& model, std::string_view question, std::string_view target,
                      std::span<const std::string> others) {
  Pass pass;
  return correct_probability(model.logits(question, target, others, pass));
}

std::vector<double> asc_classify(const AsrModel& model, std::string_view target, std::string_view candidate,
                                 AscScheme scheme) {
  check_scheme(model, scheme);
  Pass pass;
  return probabilities(model.asc_logits(target, candidate, pass));
}

std::vector<double> asc_classify(const MasrModel& model, std::string_view target, std::string_view candidate,
                                 AscScheme scheme) {
  check_scheme(model, scheme);
  Pass pass;
  return probabilities(model.asc_logits(target, candidate, pass));
}

AsrOutput asr_forward(const AsrModel& model, std::string_view question, std::string_view target,
                      std::span<const std::string> support) {
  Pass pass;
  auto rep = model.represent(question, target, support, pass);
  return {correct_probability(model.joint_logits(rep.v)), rep.v};
}

std::vector<CandidateScore> asr_rank(const AsrModel& model, std::string_view question,
                                     std::span<const std::string> candidates) {
  const std::size_t k = model.config().k;
  if (candidates.size() > k + 1) {
    throw Error(ErrorKind::config, "ASR ranks at most k+1=" + std::to_string(k + 1) + " candidates, got " +
                                       std::to_string(candidates.size()),
                "k");
  }
  std::vector<double> scores;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto support = support_for(candidates, i, k);
    scores.push_back(asr_forward(model, question, candidates[i], support).probability);
  }
  return rank_scores(scores);
}

std::vector<double> masr_forward(const MasrModel& model, std::string_view question,
                                 std::span<const std::string> candidates) {
  if (candidates.size() != model.config().k + 1) {
    throw Error(ErrorKind::config, "MASR expects k+1=" + std::to_string(model.config().k + 1) +
                                       " candidates, got " + std::to_string(candidates.size()),
                "k");
  }
  Pass pass;
  return probabilities(model.list_logits(question, candidates, pass).logits);
}

std::vector<double> score_question(const RerankerModel& model, const data::QuestionRecord& record) {
  const std::size_t n = record.candidates.size();
  if (n == 0) throw Error(ErrorKind::input, "question '" + record.id + "' has no candidates");
  return std::visit(
      [&](const auto& m) -> std::vector<double> {
        using M = std::decay_t<decltype(m)>;
        const std::size_t top = std::min(n, m.config().k + 1);
        if constexpr (std::is_same_v<M, PointwiseModel>) {
          std::vector<double> out;
          for (const auto& c : record.candidates) out.push_back(pr_score(m, record.question, c.text));
          return out;
        } else if constexpr (std::is_same_v<M, MultiClassifierModel>) {
          auto probs = multiclassifier_score(m, record.question, texts_of(record, top));
          probs.resize(top);
          return tail_scores(std::move(probs), n);
        } else if constexpr (std::is_same_v<M, PairwiseModel>) {
          const auto texts = texts_of(record, top);
          std::vector<double> out;
          for (std::size_t i = 0; i < top; ++i) {
            out.push_back(pairwise_score(m, record.question, texts[i], support_for(texts, i, m.config().k)));
          }
          return tail_scores(std::move(out), n);
        } else if constexpr (std::is_same_v<M, AsrModel>) {
          const auto ranked = asr_rank(m, record.question, texts_of(record, top));
          std::vector<double> out(top);
          for (const auto& r : ranked) out[r.index] = r.score;
          return tail_scores(std::move(out), n);
        } else {
          Pass pass;
          const auto texts = texts_of(record, top);
          return tail_scores(probabilities(m.list_logits(record.question, texts, pass).logits), n);
        }
      },
      model);
}

std::vector<std::vector<double>> score_questions(const RerankerModel& model,
                                                 std::span<const data::QuestionRecord> records,
                                                 std::size_t threads) {
  std::vector<std::vector<double>> out(records.size());
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(records.size(), 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < records.size(); ++i) out[i] = score_question(model, records[i]);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < threads; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < records.size(); i += threads) out[i] = score_question(model, records[i]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace asrk::rerankers
