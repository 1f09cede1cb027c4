#include <gtest/gtest.h>

#include <array>
#include <map>
#include <set>
#include <sstream>

#include "asrk/data/dataset.hpp"
#include "asrk/data/synthetic.hpp"
#include "asrk/errors.hpp"
#include "asrk/random.hpp"

using namespace asrk;
using namespace asrk::data;
using rerankers::AscScheme;
using rerankers::derive_asc_label;

namespace {

As2Dataset parse(const std::string& text, SplitFilter filter) {
  std::istringstream in(text);
  return read_as2_tsv(in, filter);
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

QuestionRecord random_question(Rng& rng, std::size_t n) {
  QuestionRecord q{"id", "question", {}};
  for (std::size_t i = 0; i < n; ++i) {
    q.candidates.push_back({"c" + std::to_string(i), rng.bernoulli(0.5), static_cast<int>(i)});
  }
  return q;
}

}  // namespace

TEST(AscLabels, FourWayTruthTable) {
  EXPECT_EQ(derive_asc_label(true, true, AscScheme::four_way), 0);
  EXPECT_EQ(derive_asc_label(true, false, AscScheme::four_way), 1);
  EXPECT_EQ(derive_asc_label(false, true, AscScheme::four_way), 2);
  EXPECT_EQ(derive_asc_label(false, false, AscScheme::four_way), 3);
}

TEST(AscLabels, ThreeWayTruthTable) {
  EXPECT_EQ(derive_asc_label(true, true, AscScheme::fever_three_way), 0);
  EXPECT_EQ(derive_asc_label(true, false, AscScheme::fever_three_way), 0);
  EXPECT_EQ(derive_asc_label(false, true, AscScheme::fever_three_way), 1);
  EXPECT_EQ(derive_asc_label(false, false, AscScheme::fever_three_way), 2);
}

TEST(AscLabels, SchemeNames) {
  EXPECT_EQ(rerankers::parse_asc_scheme("four_way"), AscScheme::four_way);
  EXPECT_EQ(rerankers::parse_asc_scheme(rerankers::to_string(AscScheme::fever_three_way)),
            AscScheme::fever_three_way);
  EXPECT_EQ(kind_of([] { rerankers::parse_asc_scheme("five_way"); }), ErrorKind::config);
  EXPECT_EQ(rerankers::num_classes(AscScheme::four_way), 4u);
  EXPECT_EQ(rerankers::num_classes(AscScheme::fever_three_way), 3u);
}

TEST(As2Tsv, GroupsByIdInFileOrder) {
  const auto ds = parse("a\twho?\tx\t1\nb\twhat?\ty\t0\na\twho?\tz\t0\n", SplitFilter::none);
  ASSERT_EQ(ds.questions.size(), 2u);
  EXPECT_EQ(ds.questions[0].id, "a");
  ASSERT_EQ(ds.questions[0].candidates.size(), 2u);
  EXPECT_EQ(ds.questions[0].candidates[1].text, "z");
  EXPECT_EQ(ds.questions[0].candidates[1].source_rank, 1);
  EXPECT_TRUE(ds.questions[0].candidates[0].correct);
}

TEST(As2Tsv, EvalConventionDropsAllNegativeQuestion) {
  const std::string text = "q1\twho\ta\t1\nq1\twho\tb\t0\nq2\twhy\tc\t0\nq2\twhy\td\t0\n";
  const auto ds = parse(text, SplitFilter::eval_convention);
  ASSERT_EQ(ds.questions.size(), 1u);
  EXPECT_EQ(ds.questions[0].id, "q1");
  EXPECT_EQ(ds.filtered_out, 1u);
}

TEST(As2Tsv, FiltersHoldByScan) {
  const auto questions = generate_synthetic(3, 200, 3, 0.5);
  std::ostringstream out;
  // Force some all-positive and all-negative questions.
  std::vector<QuestionRecord> mixed = questions;
  for (std::size_t i = 0; i < mixed.size(); i += 5) {
    for (auto& c : mixed[i].candidates) c.correct = (i % 10 == 0);
  }
  write_as2_tsv(out, mixed);
  const auto eval = parse(out.str(), SplitFilter::eval_convention);
  for (const auto& q : eval.questions) {
    EXPECT_GT(q.positives(), 0u);
    EXPECT_GT(q.negatives(), 0u);
  }
  const auto train = parse(out.str(), SplitFilter::train_convention);
  for (const auto& q : train.questions) EXPECT_GT(q.positives(), 0u);
  EXPECT_EQ(train.questions.size() + train.filtered_out, mixed.size());
  EXPECT_EQ(eval.questions.size() + eval.filtered_out, mixed.size());
  EXPECT_LT(eval.questions.size(), train.questions.size());
}

TEST(As2Tsv, EmptyFileIsEmpty) {
  const auto ds = parse("", SplitFilter::eval_convention);
  EXPECT_TRUE(ds.questions.empty());
  EXPECT_EQ(ds.filtered_out, 0u);
}

TEST(As2Tsv, MalformedLineNamesLineNumber) {
  try {
    parse("a\tb\tc\t1\nbroken line\n", SplitFilter::none);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(As2Tsv, BadLabelIsValueError) {
  EXPECT_EQ(kind_of([] { parse("a\tb\tc\t2\n", SplitFilter::none); }), ErrorKind::value);
  EXPECT_EQ(kind_of([] { parse("a\tb\tc\tyes\n", SplitFilter::none); }), ErrorKind::value);
}

TEST(As2Tsv, CrlfAndBlankLinesTolerated) {
  const auto ds = parse("a\tb\tc\t1\r\n\r\n\na\tb\td\t0\r\n", SplitFilter::none);
  ASSERT_EQ(ds.questions.size(), 1u);
  EXPECT_EQ(ds.questions[0].candidates[1].text, "d");
  EXPECT_FALSE(ds.questions[0].candidates[1].correct);
}

TEST(As2Tsv, RoundTripIsStructurallyEqual) {
  const auto questions = generate_synthetic(11, 50, 5, 0.9);
  std::ostringstream out;
  write_as2_tsv(out, questions);
  const auto back = parse(out.str(), SplitFilter::none);
  EXPECT_EQ(back.questions, questions);
  std::ostringstream again;
  write_as2_tsv(again, back.questions);
  EXPECT_EQ(again.str(), out.str());
}

TEST(As2Tsv, MissingFileIsIoError) {
  EXPECT_EQ(kind_of([] { load_as2_tsv("/nonexistent/x.tsv", SplitFilter::none); }), ErrorKind::io);
}

TEST(Fever, LabelVariantsNormalize) {
  EXPECT_EQ(parse_fever_label("SUPPORTS"), FeverLabel::supported);
  EXPECT_EQ(parse_fever_label("Supported"), FeverLabel::supported);
  EXPECT_EQ(parse_fever_label("REFUTES"), FeverLabel::refuted);
  EXPECT_EQ(parse_fever_label("NOT ENOUGH INFO"), FeverLabel::not_enough_info);
  EXPECT_EQ(parse_fever_label("not_enough_info"), FeverLabel::not_enough_info);
}

TEST(Fever, UnknownLabelNamesString) {
  std::istringstream in(R"({"claim":"c","evidence":"e","label":"MAYBE"})");
  try {
    read_fever_jsonl(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::value);
    EXPECT_NE(std::string(e.what()).find("MAYBE"), std::string::npos);
  }
}

TEST(Fever, ParsesRecordsAndCountsEmptyEvidence) {
  std::istringstream in(
      "{\"claim\":\"a\",\"evidence\":\"b\",\"label\":\"SUPPORTS\"}\n"
      "\n"
      "{\"claim\":\"c\",\"evidence\":[\"d\",\"e\"],\"label\":\"Refuted\"}\n"
      "{\"claim\":\"f\",\"evidence\":\"\",\"label\":\"NOT ENOUGH INFO\"}\n");
  const auto ds = read_fever_jsonl(in);
  ASSERT_EQ(ds.records.size(), 3u);
  EXPECT_EQ(ds.records[1].evidence, "d e");
  EXPECT_EQ(ds.records[1].label, FeverLabel::refuted);
  EXPECT_EQ(ds.empty_evidence, 1u);
}

TEST(Fever, MalformedJsonIsParseError) {
  std::istringstream in("{\"claim\": \n");
  EXPECT_EQ(kind_of([&] { read_fever_jsonl(in); }), ErrorKind::parse);
}

TEST(Fever, RoundTrip) {
  SyntheticConfig config;
  config.n_questions = 10;
  const auto records = generate_synthetic_fever(5, config);
  std::stringstream buf;
  write_fever_jsonl(buf, records);
  const auto back = read_fever_jsonl(buf);
  EXPECT_EQ(back.records, records);
}

TEST(AscPairs, TwoCandidateExample) {
  QuestionRecord q{"q", "?", {{"a", true, 0}, {"b", false, 1}}};
  const auto pairs = build_asc_pairs(q, 1, AscScheme::four_way);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].label, 1);
  EXPECT_EQ(pairs[1].label, 2);
  EXPECT_EQ(pairs[0].target, "a");
  EXPECT_EQ(pairs[0].candidate, "b");
}

TEST(AscPairs, CountIsKPlusOneTimesK) {
  Rng rng(9);
  for (std::size_t k = 1; k <= 5; ++k) {
    const auto q = random_question(rng, k + 3);
    EXPECT_EQ(build_asc_pairs(q, k, AscScheme::four_way).size(), (k + 1) * k);
  }
}

TEST(AscPairs, ZeroKRejected) {
  QuestionRecord q{"q", "?", {{"a", true, 0}}};
  EXPECT_EQ(kind_of([&] { build_asc_pairs(q, 0, AscScheme::four_way); }), ErrorKind::config);
}

TEST(AscPairs, MatchesBruteForceRelabeling) {
  const std::map<std::pair<bool, bool>, int> four{{{true, true}, 0}, {{true, false}, 1},
                                                  {{false, true}, 2}, {{false, false}, 3}};
  const std::map<std::pair<bool, bool>, int> three{{{true, true}, 0}, {{true, false}, 0},
                                                   {{false, true}, 1}, {{false, false}, 2}};
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const auto q = random_question(rng, 2 + rng.below(7));
    const std::size_t k = 1 + rng.below(5);
    for (auto scheme : {AscScheme::four_way, AscScheme::fever_three_way}) {
      const auto& table = scheme == AscScheme::four_way ? four : three;
      const auto pairs = build_asc_pairs(q, k, scheme);
      std::set<std::pair<std::size_t, std::size_t>> seen;
      const std::size_t top = std::min(q.candidates.size(), k + 1);
      std::size_t expected = 0;
      for (std::size_t t = 0; t < top; ++t) {
        for (std::size_t c = 0; c < top; ++c) {
          if (t != c) ++expected;
        }
      }
      ASSERT_EQ(pairs.size(), expected);
      for (const auto& p : pairs) {
        ASSERT_LT(p.target_index, top);
        ASSERT_LT(p.candidate_index, top);
        ASSERT_NE(p.target_index, p.candidate_index);
        EXPECT_TRUE(seen.insert({p.target_index, p.candidate_index}).second);
        const bool tc = q.candidates[p.target_index].correct;
        const bool cc = q.candidates[p.candidate_index].correct;
        EXPECT_EQ(p.label, table.at({tc, cc}));
        EXPECT_EQ(p.target, q.candidates[p.target_index].text);
        EXPECT_EQ(p.candidate, q.candidates[p.candidate_index].text);
      }
    }
  }
}

TEST(AscPairs, LabelDistributionMatchesCounts) {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 1 + rng.below(4);
    const auto q = random_question(rng, k + 1 + rng.below(3));
    std::size_t pos = 0;
    for (std::size_t i = 0; i <= k; ++i) pos += q.candidates[i].correct ? 1 : 0;
    const std::size_t neg = k + 1 - pos;

    std::array<std::size_t, 4> four{};
    for (const auto& p : build_asc_pairs(q, k, AscScheme::four_way)) ++four[static_cast<std::size_t>(p.label)];
    EXPECT_EQ(four[0], pos * (pos == 0 ? 0 : pos - 1));
    EXPECT_EQ(four[1], pos * neg);
    EXPECT_EQ(four[2], neg * pos);
    EXPECT_EQ(four[3], neg * (neg == 0 ? 0 : neg - 1));

    std::array<std::size_t, 3> three{};
    for (const auto& p : build_asc_pairs(q, k, AscScheme::fever_three_way)) {
      ++three[static_cast<std::size_t>(p.label)];
    }
    EXPECT_EQ(three[0], pos * k);
    EXPECT_EQ(three[1], neg * pos);
    EXPECT_EQ(three[2], neg * (neg == 0 ? 0 : neg - 1));
  }
}

TEST(Synthetic, SameSeedSameCorpus) {
  EXPECT_EQ(generate_synthetic(42, 30, 4, 0.9), generate_synthetic(42, 30, 4, 0.9));
  EXPECT_NE(generate_synthetic(42, 30, 4, 0.9), generate_synthetic(43, 30, 4, 0.9));
}

TEST(Synthetic, ShapeAndLabels) {
  const auto qs = generate_synthetic(1, 100, 4, 0.9);
  ASSERT_EQ(qs.size(), 100u);
  for (const auto& q : qs) {
    ASSERT_EQ(q.candidates.size(), 4u);
    EXPECT_GE(q.positives(), 1u);
    EXPECT_GE(q.negatives(), 1u);
    for (std::size_t i = 0; i < q.candidates.size(); ++i) EXPECT_EQ(q.candidates[i].source_rank, static_cast<int>(i));
  }
  const auto two = generate_synthetic(1, 20, 2, 0.9);
  for (const auto& q : two) EXPECT_EQ(q.positives(), 1u);
}

std::string evidence_of(const std::string& text) { return text.substr(text.rfind(' ') + 1); }

TEST(Synthetic, FullSupportSharesEvidence) {
  for (const auto& q : generate_synthetic(8, 100, 5, 1.0)) {
    std::set<std::string> ev;
    for (const auto& c : q.candidates) {
      if (c.correct) ev.insert(evidence_of(c.text));
    }
    EXPECT_EQ(ev.size(), 1u);
  }
}

TEST(Synthetic, ZeroSupportSharesOnlyByChance) {
  SyntheticConfig config;
  config.n_questions = 2000;
  config.support_strength = 0.0;
  std::size_t correct_pairs = 0;
  std::size_t shared = 0;
  for (const auto& q : generate_synthetic(8, config)) {
    for (std::size_t i = 0; i < q.candidates.size(); ++i) {
      for (std::size_t j = i + 1; j < q.candidates.size(); ++j) {
        if (q.candidates[i].correct && q.candidates[j].correct) {
          ++correct_pairs;
          shared += evidence_of(q.candidates[i].text) == evidence_of(q.candidates[j].text) ? 1 : 0;
        }
      }
    }
  }
  const double rate = static_cast<double>(shared) / static_cast<double>(correct_pairs);
  EXPECT_NEAR(rate, 1.0 / static_cast<double>(config.evidence_tokens), 0.02);
}

TEST(Synthetic, FeverPairsUseThreeWayLabels) {
  SyntheticConfig config;
  config.n_questions = 5;
  config.n_candidates = 4;
  const auto records = generate_synthetic_fever(3, config);
  EXPECT_EQ(records.size(), 5u * 4u * 3u);
  std::set<FeverLabel> labels;
  for (const auto& r : records) labels.insert(r.label);
  EXPECT_EQ(labels.size(), 3u);
}

TEST(Synthetic, RejectsDegenerateConfig) {
  EXPECT_EQ(kind_of([] { generate_synthetic(1, 10, 1, 0.5); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { generate_synthetic(1, 10, 4, 1.5); }), ErrorKind::config);
}
