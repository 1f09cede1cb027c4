#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "../support/metric_oracle.hpp"
#include "asrk/errors.hpp"
#include "asrk/eval/metrics.hpp"
#include "asrk/eval/significance.hpp"
#include "asrk/eval/sweep.hpp"
#include "asrk/random.hpp"

using namespace asrk;
using namespace asrk::eval;

namespace {

QuestionRun qrun(std::string id, std::vector<double> scores, std::vector<char> labels) {
  return {std::move(id), std::move(scores), std::move(labels)};
}

RunResult random_run(Rng& rng, std::size_t questions, bool coarse) {
  RunResult run;
  for (std::size_t i = 0; i < questions; ++i) {
    const std::size_t n = 1 + rng.below(8);
    QuestionRun q{"q" + std::to_string(i), {}, {}};
    for (std::size_t j = 0; j < n; ++j) {
      q.scores.push_back(coarse ? static_cast<double>(rng.below(4)) : rng.normal());
      q.labels.push_back(rng.bernoulli(0.4) ? 1 : 0);
    }
    q.labels[rng.below(n)] = 1;
    run.questions.push_back(std::move(q));
  }
  return run;
}

std::vector<oracle::Question> to_oracle(const RunResult& run) {
  std::vector<oracle::Question> out;
  for (const auto& q : run.questions) out.push_back({q.scores, q.labels});
  return out;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no asrk::Error thrown";
  return ErrorKind::input;
}

// Null pair: shared labels, independent normal scores per system.
std::pair<RunResult, RunResult> null_pair(Rng& rng, std::size_t questions) {
  RunResult a, b;
  for (std::size_t i = 0; i < questions; ++i) {
    QuestionRun qa{"q" + std::to_string(i), {}, {}};
    for (std::size_t j = 0; j < 12; ++j) qa.labels.push_back(rng.bernoulli(0.3) ? 1 : 0);
    qa.labels[0] = 1;
    QuestionRun qb = qa;
    for (std::size_t j = 0; j < 12; ++j) {
      qa.scores.push_back(rng.normal());
      qb.scores.push_back(rng.normal());
    }
    a.questions.push_back(std::move(qa));
    b.questions.push_back(std::move(qb));
  }
  return {a, b};
}

}  // namespace

TEST(Metrics, SingleCorrectRanking) {
  RunResult run{{qrun("a", {1.0}, {1})}};
  EXPECT_EQ(p_at_1(run), 1.0);
}

TEST(Metrics, HalfTopsCorrect) {
  RunResult run{{qrun("a", {0.9, 0.1}, {1, 0}), qrun("b", {0.9, 0.1}, {0, 1})}};
  EXPECT_EQ(p_at_1(run), 0.5);
}

TEST(Metrics, IncorrectThenCorrect) {
  RunResult run{{qrun("a", {0.9, 0.1}, {0, 1})}};
  EXPECT_EQ(mean_average_precision(run), 0.5);
  EXPECT_EQ(mean_reciprocal_rank(run), 0.5);
}

TEST(Metrics, BothCorrect) {
  RunResult run{{qrun("a", {0.9, 0.1}, {1, 1})}};
  EXPECT_EQ(mean_average_precision(run), 1.0);
  EXPECT_EQ(mean_reciprocal_rank(run), 1.0);
}

TEST(Metrics, TieGoesToLowerIndex) {
  RunResult run{{qrun("a", {0.5, 0.5}, {0, 1})}};
  EXPECT_EQ(p_at_1(run), 0.0);
  RunResult flipped{{qrun("a", {0.5, 0.5}, {1, 0})}};
  EXPECT_EQ(p_at_1(flipped), 1.0);
}

TEST(Metrics, EmptyRunAndMissingPositive) {
  EXPECT_EQ(kind_of([] { p_at_1(RunResult{}); }), ErrorKind::input);
  RunResult none{{qrun("a", {0.5, 0.2}, {0, 0})}};
  EXPECT_EQ(kind_of([&] { mean_average_precision(none); }), ErrorKind::input);
  EXPECT_EQ(kind_of([&] { mean_reciprocal_rank(none); }), ErrorKind::input);
  EXPECT_EQ(p_at_1(none), 0.0);
}

TEST(Metrics, InvalidRunsRejected) {
  RunResult ragged{{qrun("a", {0.5, 0.2}, {1})}};
  EXPECT_EQ(kind_of([&] { p_at_1(ragged); }), ErrorKind::value);
  RunResult nan{{qrun("a", {std::nan("")}, {1})}};
  EXPECT_EQ(kind_of([&] { p_at_1(nan); }), ErrorKind::value);
}

TEST(Metrics, AgreeWithBruteForceOracle) {
  Rng rng(4242);
  for (int trial = 0; trial < 1000; ++trial) {
    const RunResult run = random_run(rng, 1 + rng.below(12), trial % 2 == 0);
    const auto ref = to_oracle(run);
    EXPECT_EQ(p_at_1(run), oracle::mean_over(ref, oracle::precision_at_1));
    EXPECT_EQ(mean_average_precision(run), oracle::mean_over(ref, oracle::average_precision));
    EXPECT_EQ(mean_reciprocal_rank(run), oracle::mean_over(ref, oracle::reciprocal_rank));
  }
}

TEST(Metrics, BoundedAndEqualWhenSinglePositiveOnTop) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto report = evaluate(random_run(rng, 10, false));
    for (double m : {report.p_at_1, report.map, report.mrr}) {
      EXPECT_GE(m, 0.0);
      EXPECT_LE(m, 1.0);
    }
  }
  RunResult top{{qrun("a", {0.9, 0.1, 0.3}, {1, 0, 0}), qrun("b", {0.2, 0.8}, {0, 1})}};
  const auto r = evaluate(top);
  EXPECT_EQ(r.p_at_1, 1.0);
  EXPECT_EQ(r.map, 1.0);
  EXPECT_EQ(r.mrr, 1.0);
}

TEST(Metrics, ParseNames) {
  EXPECT_EQ(parse_metric("p1"), Metric::p_at_1);
  EXPECT_EQ(parse_metric("map"), Metric::map);
  EXPECT_EQ(parse_metric("mrr"), Metric::mrr);
  EXPECT_EQ(kind_of([] { parse_metric("ndcg"); }), ErrorKind::config);
}

TEST(RunFile, RoundTripIsExact) {
  Rng rng(1);
  const RunResult run = random_run(rng, 30, false);
  std::stringstream buf;
  write_run(buf, run);
  const RunResult back = read_run(buf);
  EXPECT_EQ(back, run);
  const auto a = evaluate(run);
  const auto b = evaluate(back);
  EXPECT_EQ(a.p_at_1, b.p_at_1);
  EXPECT_EQ(a.map, b.map);
  EXPECT_EQ(a.mrr, b.mrr);
}

TEST(RunFile, ReordersByCandidateIndex) {
  std::istringstream in("q\t1\t0.5\t0\nq\t0\t0.25\t1\n");
  const RunResult run = read_run(in);
  ASSERT_EQ(run.questions.size(), 1u);
  EXPECT_EQ(run.questions[0].scores, (std::vector<double>{0.25, 0.5}));
  EXPECT_EQ(run.questions[0].labels, (std::vector<char>{1, 0}));
}

TEST(RunFile, Malformed) {
  std::istringstream gap("q\t0\t0.5\t0\nq\t2\t0.1\t1\n");
  EXPECT_EQ(kind_of([&] { read_run(gap); }), ErrorKind::parse);
  std::istringstream dup("q\t0\t0.5\t0\nq\t0\t0.1\t1\n");
  EXPECT_EQ(kind_of([&] { read_run(dup); }), ErrorKind::parse);
  std::istringstream label("q\t0\t0.5\t7\n");
  EXPECT_EQ(kind_of([&] { read_run(label); }), ErrorKind::value);
  std::istringstream score("q\t0\tabc\t1\n");
  EXPECT_EQ(kind_of([&] { read_run(score); }), ErrorKind::parse);
}

TEST(Randomization, IdenticalRunsGiveOne) {
  Rng rng(2);
  const RunResult run = random_run(rng, 40, false);
  for (auto metric : {Metric::p_at_1, Metric::map, Metric::mrr}) {
    EXPECT_EQ(randomization_test(run, run, metric, 5000, 3).p_value, 1.0);
  }
}

TEST(Randomization, AllVersusNoneMatchesExactEnumeration) {
  RunResult a, b;
  for (int i = 0; i < 20; ++i) {
    a.questions.push_back(qrun("q" + std::to_string(i), {0.9, 0.1}, {1, 0}));
    b.questions.push_back(qrun("q" + std::to_string(i), {0.1, 0.9}, {1, 0}));
  }
  // Exact null: enumerate all 2^20 swap patterns.
  const auto va = per_question(a, Metric::p_at_1);
  const auto vb = per_question(b, Metric::p_at_1);
  std::size_t extreme = 0;
  const double observed = 20.0;
  for (std::uint32_t mask = 0; mask < (1u << 20); ++mask) {
    double total = 0.0;
    for (int i = 0; i < 20; ++i) total += ((mask >> i) & 1) ? vb[i] - va[i] : va[i] - vb[i];
    if (std::abs(total) >= observed) ++extreme;
  }
  const double exact = static_cast<double>(extreme) / static_cast<double>(1u << 20);
  EXPECT_EQ(extreme, 2u);
  EXPECT_LT(exact, 0.001);
  const auto r = randomization_test(a, b, Metric::p_at_1, 100000, 7);
  EXPECT_LT(r.p_value, 0.001);
  EXPECT_EQ(r.metric_a, 1.0);
  EXPECT_EQ(r.metric_b, 0.0);
  EXPECT_EQ(r.observed, 1.0);
}

TEST(Randomization, SymmetricInArguments) {
  Rng rng(10);
  auto [a, b] = null_pair(rng, 30);
  for (auto metric : {Metric::p_at_1, Metric::map}) {
    EXPECT_EQ(randomization_test(a, b, metric, 20000, 5).p_value, randomization_test(b, a, metric, 20000, 5).p_value);
  }
}

TEST(Randomization, ThreadCountIndependent) {
  Rng rng(11);
  auto [a, b] = null_pair(rng, 30);
  const double one = randomization_test(a, b, Metric::map, 45000, 9, 1).p_value;
  EXPECT_EQ(one, randomization_test(a, b, Metric::map, 45000, 9, 4).p_value);
  EXPECT_EQ(one, randomization_test(a, b, Metric::map, 45000, 9, 1).p_value);
}

TEST(Randomization, AlignedByIdNotOrder) {
  Rng rng(12);
  auto [a, b] = null_pair(rng, 10);
  RunResult shuffled = b;
  std::reverse(shuffled.questions.begin(), shuffled.questions.end());
  EXPECT_EQ(randomization_test(a, b, Metric::map, 5000, 1).p_value,
            randomization_test(a, shuffled, Metric::map, 5000, 1).p_value);
}

TEST(Randomization, MismatchedQuestionsNamed) {
  RunResult a{{qrun("x", {1.0}, {1}), qrun("y", {1.0}, {1})}};
  RunResult b{{qrun("x", {1.0}, {1}), qrun("z", {1.0}, {1})}};
  try {
    randomization_test(a, b, Metric::p_at_1, 100, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::alignment);
    const std::string what = e.what();
    EXPECT_NE(what.find("y"), std::string::npos);
    EXPECT_NE(what.find("z"), std::string::npos);
  }
}

TEST(Randomization, NullPValuesLookUniform) {
  Rng rng(2025);
  std::vector<double> pvalues;
  for (int rep = 0; rep < 200; ++rep) {
    auto [a, b] = null_pair(rng, 40);
    pvalues.push_back(randomization_test(a, b, Metric::map, 2000, derive_seed(77, rep)).p_value);
  }
  EXPECT_GT(ks_uniform_pvalue(pvalues), 0.01);
}

TEST(Ks, KnownStatistic) {
  EXPECT_NEAR(ks_statistic({0.5}), 0.5, 1e-15);
  EXPECT_NEAR(ks_statistic({0.1, 0.6}), 0.4, 1e-15);
  std::vector<double> grid;
  for (int i = 0; i < 100; ++i) grid.push_back((i + 0.5) / 100.0);
  EXPECT_GT(ks_uniform_pvalue(grid), 0.99);
  std::vector<double> skewed(100, 0.01);
  EXPECT_LT(ks_uniform_pvalue(skewed), 1e-6);
}

TEST(Ks, RejectsNonUniformDraws) {
  Rng rng(3);
  std::vector<double> squares;
  for (int i = 0; i < 500; ++i) {
    const double u = rng.uniform();
    squares.push_back(u * u);
  }
  EXPECT_LT(ks_uniform_pvalue(squares), 0.01);
}

TEST(Sweep, SingleK) {
  const std::size_t ks[] = {1};
  auto result = sweep_k([](std::size_t k) { return k; },
                        [](std::size_t) { return RunResult{{qrun("a", {0.9, 0.1}, {1, 0})}}; }, ks);
  ASSERT_EQ(result.rows.size(), 1u);
  EXPECT_EQ(result.selected_k, 1u);
}

TEST(Sweep, SelectsArgmaxWithSmallestKTie) {
  const std::size_t ks[] = {4, 1, 2, 3};
  auto result = sweep_k([](std::size_t k) { return k; },
                        [](std::size_t k) {
                          // k=2 and k=4 both rank the correct answer first.
                          const bool good = k % 2 == 0;
                          return RunResult{{qrun("a", {good ? 0.9 : 0.1, 0.5}, {1, 0})}};
                        },
                        ks);
  ASSERT_EQ(result.rows.size(), 4u);
  EXPECT_EQ(result.rows[0].k, 4u);
  EXPECT_EQ(result.selected_k, 2u);
  EXPECT_EQ(result.selected_metric, 1.0);
}

TEST(Sweep, EmptyKsRejected) {
  EXPECT_EQ(kind_of([] {
              sweep_k([](std::size_t k) { return k; }, [](std::size_t) { return RunResult{}; },
                      std::span<const std::size_t>{});
            }),
            ErrorKind::input);
}
