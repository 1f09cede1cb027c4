#include "asrk/data/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "asrk/errors.hpp"

namespace asrk::data {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::string sanitize_field(std::string_view text) {
  std::string out(text);
  std::replace_if(out.begin(), out.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

std::size_t QuestionRecord::positives() const {
  return static_cast<std::size_t>(
      std::count_if(candidates.begin(), candidates.end(), [](const Candidate& c) { return c.correct; }));
}

bool passes(const QuestionRecord& record, SplitFilter filter) {
  switch (filter) {
    case SplitFilter::none: return true;
    case SplitFilter::train_convention: return record.positives() > 0;
    case SplitFilter::eval_convention: return record.positives() > 0 && record.negatives() > 0;
  }
  return true;
}

SplitFilter parse_split_filter(std::string_view text) {
  if (text == "train_convention" || text == "train") return SplitFilter::train_convention;
  if (text == "eval_convention" || text == "eval") return SplitFilter::eval_convention;
  if (text == "none") return SplitFilter::none;
  throw Error(ErrorKind::config, "unknown split filter '" + std::string(text) + "'", "split_filter");
}

As2Dataset read_as2_tsv(std::istream& in, SplitFilter filter) {
  std::vector<QuestionRecord> grouped;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 4) {
      throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": expected 4 tab-separated fields, got " +
                                        std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": empty question id");
    bool correct = false;
    if (fields[3] == "1") {
      correct = true;
    } else if (fields[3] != "0") {
      throw Error(ErrorKind::value, "line " + std::to_string(line_no) + ": label must be 0 or 1, got '" +
                                        std::string(fields[3]) + "'");
    }
    const std::string id(fields[0]);
    auto [it, inserted] = index.try_emplace(id, grouped.size());
    if (inserted) grouped.push_back({id, std::string(fields[1]), {}});
    QuestionRecord& q = grouped[it->second];
    if (q.question != fields[1]) {
      throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": question text differs for id '" + id + "'");
    }
    q.candidates.push_back({std::string(fields[2]), correct, static_cast<int>(q.candidates.size())});
  }
  As2Dataset out;
  for (auto& q : grouped) {
    if (passes(q, filter)) {
      out.questions.push_back(std::move(q));
    } else {
      ++out.filtered_out;
    }
  }
  return out;
}

As2Dataset load_as2_tsv(const std::filesystem::path& path, SplitFilter filter) {
  auto in = open_input(path);
  return read_as2_tsv(in, filter);
}

void write_as2_tsv(std::ostream& out, std::span<const QuestionRecord> records) {
  for (const auto& q : records) {
    std::vector<const Candidate*> ordered;
    for (const auto& c : q.candidates) ordered.push_back(&c);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const Candidate* a, const Candidate* b) { return a->source_rank < b->source_rank; });
    for (const Candidate* c : ordered) {
      out << sanitize_field(q.id) << '\t' << sanitize_field(q.question) << '\t' << sanitize_field(c->text)
          << '\t' << (c->correct ? '1' : '0') << '\n';
    }
  }
}

void save_as2_tsv(const std::filesystem::path& path, std::span<const QuestionRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  write_as2_tsv(out, records);
}

FeverLabel parse_fever_label(std::string_view text) {
  std::string key;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) key.push_back(static_cast<char>(std::tolower(c)));
  }
  if (key == "supports" || key == "supported" || key == "support") return FeverLabel::supported;
  if (key == "refutes" || key == "refuted" || key == "refute") return FeverLabel::refuted;
  if (key == "notenoughinfo" || key == "nei" || key == "notenoughinformation") {
    return FeverLabel::not_enough_info;
  }
  throw Error(ErrorKind::value, "unknown FEVER label '" + std::string(text) + "'");
}

std::string_view to_string(FeverLabel label) {
  switch (label) {
    case FeverLabel::supported: return "SUPPORTS";
    case FeverLabel::refuted: return "REFUTES";
    case FeverLabel::not_enough_info: return "NOT ENOUGH INFO";
  }
  return "NOT ENOUGH INFO";
}

FeverDataset read_fever_jsonl(std::istream& in) {
  using nlohmann::json;
  FeverDataset out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::parse, where + e.what());
    }
    if (!obj.is_object() || !obj.contains("claim") || !obj.contains("label") || !obj["claim"].is_string() ||
        !obj["label"].is_string()) {
      throw Error(ErrorKind::parse, where + "expected an object with string fields claim and label");
    }
    FeverRecord record;
    record.claim = obj["claim"].get<std::string>();
    try {
      record.label = parse_fever_label(obj["label"].get<std::string>());
    } catch (const Error& e) {
      throw Error(ErrorKind::value, where + e.what());
    }
    if (obj.contains("evidence")) {
      const json& ev = obj["evidence"];
      if (ev.is_string()) {
        record.evidence = ev.get<std::string>();
      } else if (ev.is_array()) {
        for (const json& part : ev) {
          if (!part.is_string()) throw Error(ErrorKind::parse, where + "evidence array must hold strings");
          if (!record.evidence.empty()) record.evidence.push_back(' ');
          record.evidence += part.get<std::string>();
        }
      } else if (!ev.is_null()) {
        throw Error(ErrorKind::parse, where + "evidence must be a string or an array of strings");
      }
    }
    if (record.evidence.empty()) ++out.empty_evidence;
    out.records.push_back(std::move(record));
  }
  return out;
}

FeverDataset load_fever_jsonl(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_fever_jsonl(in);
}

void write_fever_jsonl(std::ostream& out, std::span<const FeverRecord> records) {
  for (const auto& r : records) {
    nlohmann::ordered_json obj;
    obj["claim"] = r.claim;
    obj["evidence"] = r.evidence;
    obj["label"] = to_string(r.label);
    out << obj.dump() << '\n';
  }
}

std::vector<AnswerPairExample> build_asc_pairs(const QuestionRecord& record, std::size_t k,
                                               rerankers::AscScheme scheme) {
  if (k == 0) throw Error(ErrorKind::config, "build_asc_pairs needs k >= 1");
  const std::size_t top = std::min(record.candidates.size(), k + 1);
  std::vector<AnswerPairExample> out;
  for (std::size_t t = 0; t < top; ++t) {
    for (std::size_t c = 0; c < top; ++c) {
      if (c == t) continue;
      const auto& target = record.candidates[t];
      const auto& cand = record.candidates[c];
      out.push_back({target.text, cand.text, rerankers::derive_asc_label(target.correct, cand.correct, scheme), t, c});
    }
  }
  return out;
}

}  // namespace asrk::data
