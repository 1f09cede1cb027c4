#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asrk/rerankers/asc_labels.hpp"

namespace asrk::data {

struct Candidate {
  std::string text;
  bool correct = false;
  int source_rank = 0;  // 0-based position in the upstream ranking
};

struct QuestionRecord {
  std::string id;
  std::string question;
  std::vector<Candidate> candidates;

  std::size_t positives() const;
  std::size_t negatives() const { return candidates.size() - positives(); }

  bool operator==(const QuestionRecord&) const = default;
};

inline bool operator==(const Candidate& a, const Candidate& b) {
  return a.text == b.text && a.correct == b.correct && a.source_rank == b.source_rank;
}

enum class SplitFilter {
  train_convention,  // keep questions with at least one correct candidate
  eval_convention,   // ... and at least one incorrect candidate
  none,
};

bool passes(const QuestionRecord& record, SplitFilter filter);
SplitFilter parse_split_filter(std::string_view text);

struct As2Dataset {
  std::vector<QuestionRecord> questions;
  std::size_t filtered_out = 0;
};

// `question_id<TAB>question<TAB>candidate<TAB>label` lines, no header.
// Lines sharing a question id form one question; source rank is the file
// order within the question. Throws parse error (with line number) on a
// malformed line and value error on a label other than 0/1.
As2Dataset read_as2_tsv(std::istream& in, SplitFilter filter);
As2Dataset load_as2_tsv(const std::filesystem::path& path, SplitFilter filter);
void write_as2_tsv(std::ostream& out, std::span<const QuestionRecord> records);
void save_as2_tsv(const std::filesystem::path& path, std::span<const QuestionRecord> records);

enum class FeverLabel { supported = 0, refuted = 1, not_enough_info = 2 };

// Case- and punctuation-insensitive: SUPPORTS, Supported, "NOT ENOUGH INFO",
// not_enough_info, NEI, ... Throws value error naming the string otherwise.
FeverLabel parse_fever_label(std::string_view text);
std::string_view to_string(FeverLabel label);

struct FeverRecord {
  std::string claim;
  std::string evidence;
  FeverLabel label = FeverLabel::not_enough_info;

  bool operator==(const FeverRecord&) const = default;
};

struct FeverDataset {
  std::vector<FeverRecord> records;
  std::size_t empty_evidence = 0;  // accepted but counted
};

// One JSON object per line with string fields claim, evidence (a string or
// an array of strings, joined by spaces) and label.
FeverDataset read_fever_jsonl(std::istream& in);
FeverDataset load_fever_jsonl(const std::filesystem::path& path);
void write_fever_jsonl(std::ostream& out, std::span<const FeverRecord> records);

struct AnswerPairExample {
  std::string target;
  std::string candidate;
  int label = 0;
  std::size_t target_index = 0;
  std::size_t candidate_index = 0;
};

// Ordered (t, c) pairs among the first k+1 candidates, each labelled by
// derive_asc_label.
std::vector<AnswerPairExample> build_asc_pairs(const QuestionRecord& record, std::size_t k,
                                               rerankers::AscScheme scheme);

}  // namespace asrk::data
