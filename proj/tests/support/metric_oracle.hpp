#pragma once

// Reference metrics written straight from the definitions: a candidate's
// rank is one plus the number of candidates that beat it, where a tie is
// won by the lower index. No sorting.

#include <algorithm>
#include <vector>

namespace asrk::oracle {

struct Question {
  std::vector<double> scores;
  std::vector<char> labels;
};

inline std::size_t rank_of(const Question& q, std::size_t j) {
  std::size_t beaten_by = 0;
  for (std::size_t i = 0; i < q.scores.size(); ++i) {
    if (q.scores[i] > q.scores[j] || (q.scores[i] == q.scores[j] && i < j)) ++beaten_by;
  }
  return beaten_by + 1;
}

inline double precision_at_1(const Question& q) {
  for (std::size_t j = 0; j < q.scores.size(); ++j) {
    if (rank_of(q, j) == 1) return q.labels[j] ? 1.0 : 0.0;
  }
  return 0.0;
}

// Sum over rank positions 1..n in order, as the formula reads.
inline double average_precision(const Question& q) {
  double total = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 1; r <= q.scores.size(); ++r) {
    for (std::size_t j = 0; j < q.scores.size(); ++j) {
      if (rank_of(q, j) != r || !q.labels[j]) continue;
      ++hits;
      std::size_t correct_within = 0;
      for (std::size_t c = 0; c < q.scores.size(); ++c) {
        if (q.labels[c] && rank_of(q, c) <= r) ++correct_within;
      }
      total += static_cast<double>(correct_within) / static_cast<double>(r);
    }
  }
  return total / static_cast<double>(hits);
}

inline double reciprocal_rank(const Question& q) {
  std::size_t best = q.scores.size() + 1;
  for (std::size_t j = 0; j < q.scores.size(); ++j) {
    if (q.labels[j]) best = std::min(best, rank_of(q, j));
  }
  return 1.0 / static_cast<double>(best);
}

template <class F>
double mean_over(const std::vector<Question>& qs, F f) {
  double s = 0.0;
  for (const auto& q : qs) s += f(q);
  return s / static_cast<double>(qs.size());
}

}  // namespace asrk::oracle
