#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asrk/data/dataset.hpp"

namespace asrk::eval {

// Scores and labels of one question, indexed by original candidate order.
struct QuestionRun {
  std::string id;
  std::vector<double> scores;
  std::vector<char> labels;  // 1 = correct

  bool operator==(const QuestionRun&) const = default;
};

struct RunResult {
  std::vector<QuestionRun> questions;

  bool operator==(const RunResult&) const = default;
};

// Throws value error on an empty question, a score/label length mismatch
// or a non-finite score.
void validate(const RunResult& run);

RunResult make_run(std::span<const data::QuestionRecord> records, std::span<const std::vector<double>> scores);

// Candidate indices by score descending, ties by ascending index.
std::vector<std::size_t> ranking(const QuestionRun& question);

enum class Metric { p_at_1, map, mrr };
std::string_view to_string(Metric metric);
// Accepts p1 / map / mrr.
Metric parse_metric(std::string_view text);

double p_at_1(const RunResult& run);
// Both throw input error on a question without a correct candidate.
double mean_average_precision(const RunResult& run);
double mean_reciprocal_rank(const RunResult& run);

double question_metric(const QuestionRun& question, Metric metric);
std::vector<double> per_question(const RunResult& run, Metric metric);
double metric_value(const RunResult& run, Metric metric);

struct MetricReport {
  double p_at_1 = 0.0;
  double map = 0.0;
  double mrr = 0.0;
  std::size_t n_questions = 0;
};
MetricReport evaluate(const RunResult& run);

// question_id<TAB>candidate_index<TAB>score<TAB>label, scores printed with
// 17 significant digits so a reload is exact.
void write_run(std::ostream& out, const RunResult& run);
RunResult read_run(std::istream& in);
void save_run(const std::string& path, const RunResult& run);
RunResult load_run(const std::string& path);

}  // namespace asrk::eval
