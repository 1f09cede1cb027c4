#include "asrk/eval/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_map>

#include "asrk/errors.hpp"

namespace asrk::eval {

namespace {

void require_nonempty(const RunResult& run) {
  if (run.questions.empty()) throw Error(ErrorKind::input, "run holds no questions");
}

void require_positive(const QuestionRun& q) {
  if (std::find(q.labels.begin(), q.labels.end(), 1) == q.labels.end()) {
    throw Error(ErrorKind::input, "question '" + q.id +
                                      "' has no correct candidate; filter the split with eval_convention");
  }
}

double average_precision(const QuestionRun& q) {
  require_positive(q);
  const auto order = ranking(q);
  double hits = 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (q.labels[order[r]]) {
      hits += 1.0;
      total += hits / static_cast<double>(r + 1);
    }
  }
  return total / hits;
}

double reciprocal_rank(const QuestionRun& q) {
  require_positive(q);
  const auto order = ranking(q);
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (q.labels[order[r]]) return 1.0 / static_cast<double>(r + 1);
  }
  return 0.0;
}

double mean_of(const std::vector<double>& values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

}  // namespace

void validate(const RunResult& run) {
  for (const auto& q : run.questions) {
    if (q.scores.empty()) throw Error(ErrorKind::value, "question '" + q.id + "' has no candidates");
    if (q.scores.size() != q.labels.size()) {
      throw Error(ErrorKind::value, "question '" + q.id + "' has " + std::to_string(q.scores.size()) +
                                        " scores but " + std::to_string(q.labels.size()) + " labels");
    }
    for (double s : q.scores) {
      if (!std::isfinite(s)) throw Error(ErrorKind::value, "question '" + q.id + "' has a non-finite score");
    }
  }
}

RunResult make_run(std::span<const data::QuestionRecord> records, std::span<const std::vector<double>> scores) {
  if (records.size() != scores.size()) {
    throw Error(ErrorKind::dimension, std::to_string(records.size()) + " questions but " +
                                          std::to_string(scores.size()) + " score lists");
  }
  RunResult run;
  for (std::size_t i = 0; i < records.size(); ++i) {
    QuestionRun q{records[i].id, scores[i], {}};
    for (const auto& c : records[i].candidates) q.labels.push_back(c.correct ? 1 : 0);
    run.questions.push_back(std::move(q));
  }
  validate(run);
  return run;
}

std::vector<std::size_t> ranking(const QuestionRun& question) {
  std::vector<std::size_t> order(question.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return question.scores[a] > question.scores[b]; });
  return order;
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::p_at_1: return "p1";
    case Metric::map: return "map";
    case Metric::mrr: return "mrr";
  }
  return "p1";
}

Metric parse_metric(std::string_view text) {
  if (text == "p1" || text == "p@1" || text == "p_at_1") return Metric::p_at_1;
  if (text == "map") return Metric::map;
  if (text == "mrr") return Metric::mrr;
  throw Error(ErrorKind::config, "unknown metric '" + std::string(text) + "' (expected p1, map or mrr)", "metric");
}

double question_metric(const QuestionRun& question, Metric metric) {
  switch (metric) {
    case Metric::p_at_1: return question.labels[ranking(question).front()] ? 1.0 : 0.0;
    case Metric::map: return average_precision(question);
    case Metric::mrr: return reciprocal_rank(question);
  }
  return 0.0;
}

std::vector<double> per_question(const RunResult& run, Metric metric) {
  require_nonempty(run);
  validate(run);
  std::vector<double> out;
  out.reserve(run.questions.size());
  for (const auto& q : run.questions) out.push_back(question_metric(q, metric));
  return out;
}

double metric_value(const RunResult& run, Metric metric) { return mean_of(per_question(run, metric)); }

double p_at_1(const RunResult& run) { return metric_value(run, Metric::p_at_1); }
double mean_average_precision(const RunResult& run) { return metric_value(run, Metric::map); }
double mean_reciprocal_rank(const RunResult& run) { return metric_value(run, Metric::mrr); }

MetricReport evaluate(const RunResult& run) {
  return {p_at_1(run), mean_average_precision(run), mean_reciprocal_rank(run), run.questions.size()};
}

void write_run(std::ostream& out, const RunResult& run) {
  char buf[64];
  for (const auto& q : run.questions) {
    for (std::size_t i = 0; i < q.scores.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", q.scores[i]);
      out << q.id << '\t' << i << '\t' << buf << '\t' << (q.labels[i] ? 1 : 0) << '\n';
    }
  }
}

RunResult read_run(std::istream& in) {
  struct Pending {
    std::map<std::size_t, std::pair<double, char>> rows;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, Pending> pending;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 4) throw Error(ErrorKind::parse, where + "expected 4 tab-separated fields");
    std::size_t index = 0;
    auto [p, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), index);
    if (ec != std::errc() || p != fields[1].data() + fields[1].size()) {
      throw Error(ErrorKind::parse, where + "bad candidate index '" + fields[1] + "'");
    }
    char* end = nullptr;
    const double score = std::strtod(fields[2].c_str(), &end);
    if (fields[2].empty() || *end != '\0') throw Error(ErrorKind::parse, where + "bad score '" + fields[2] + "'");
    if (fields[3] != "0" && fields[3] != "1") {
      throw Error(ErrorKind::value, where + "label must be 0 or 1, got '" + fields[3] + "'");
    }
    auto [it, inserted] = pending.try_emplace(fields[0]);
    if (inserted) order.push_back(fields[0]);
    if (!it->second.rows.emplace(index, std::make_pair(score, fields[3] == "1" ? char{1} : char{0})).second) {
      throw Error(ErrorKind::parse, where + "duplicate candidate index " + fields[1] + " for '" + fields[0] + "'");
    }
  }
  RunResult run;
  for (const auto& id : order) {
    QuestionRun q{id, {}, {}};
    std::size_t expected = 0;
    for (const auto& [index, row] : pending[id].rows) {
      if (index != expected++) {
        throw Error(ErrorKind::parse, "question '" + id + "' candidate indices are not contiguous from 0");
      }
      q.scores.push_back(row.first);
      q.labels.push_back(row.second);
    }
    run.questions.push_back(std::move(q));
  }
  validate(run);
  return run;
}

void save_run(const std::string& path, const RunResult& run) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  write_run(out, run);
}

RunResult load_run(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  return read_run(in);
}

}  // namespace asrk::eval
