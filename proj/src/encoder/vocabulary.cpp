#include "asrk/encoder/vocabulary.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "asrk/errors.hpp"

namespace asrk::encoder {
namespace {

const std::vector<std::string> kReserved{"[PAD]", "[CLS]", "[SEP]", "[EOS]", "[UNK]"};

bool is_ascii(unsigned char c) { return c < 0x80; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_ascii(c) && std::isspace(c)) {
      flush();
    } else if (is_ascii(c) && std::ispunct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      current.push_back(is_ascii(c) ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  flush();
  return out;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(kReserved) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], static_cast<int>(i));
  for (auto& t : tokens) {
    if (t.empty() || t.find_first_of("\n\r") != std::string::npos) {
      throw Error(ErrorKind::value, "vocabulary tokens must be non-empty single-line strings");
    }
    const int next = static_cast<int>(tokens_.size());
    if (!index_.emplace(t, next).second) {
      throw Error(ErrorKind::value, "duplicate vocabulary token '" + t + "'");
    }
    tokens_.push_back(std::move(t));
  }
}

int Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw Error(ErrorKind::vocabulary, "token id " + std::to_string(id) + " outside vocabulary");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::ids(std::string_view text) const {
  std::vector<int> out;
  for (const auto& t : tokenize(text)) out.push_back(id(t));
  return out;
}

void Vocabulary::write(std::ostream& out) const {
  for (std::size_t i = kReservedCount; i < tokens_.size(); ++i) out << tokens_[i] << '\n';
}

std::string Vocabulary::serialize() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

Vocabulary Vocabulary::read(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens));
}

Vocabulary build_vocab(const std::vector<std::string>& corpus, std::size_t max_size) {
  if (max_size < kReservedCount + 1) {
    throw Error(ErrorKind::config, "vocabulary max_size must be at least " +
                                       std::to_string(kReservedCount + 1));
  }
  if (corpus.empty()) throw Error(ErrorKind::input, "cannot build a vocabulary from an empty corpus");
  std::map<std::string, std::size_t> counts;
  for (const auto& sentence : corpus)
    for (auto& t : tokenize(sentence)) ++counts[t];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  // counts is already lexicographic, so a stable sort on frequency keeps ties ordered.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  for (auto& [token, count] : ranked) {
    if (tokens.size() + kReservedCount >= max_size) break;
    tokens.push_back(token);
  }
  return Vocabulary(std::move(tokens));
}

}  // namespace asrk::encoder
