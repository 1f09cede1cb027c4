#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace asrk::encoder {

inline constexpr int kPadId = 0;
inline constexpr int kClsId = 1;
inline constexpr int kSepId = 2;
inline constexpr int kEosId = 3;
inline constexpr int kUnkId = 4;
inline constexpr int kReservedCount = 5;

// Lowercased ASCII; each ASCII punctuation character is its own token and
// whitespace separates the rest. Non-ASCII bytes stay inside word tokens.
std::vector<std::string> tokenize(std::string_view text);

class Vocabulary {
 public:
  // Reserved tokens only.
  Vocabulary();
  // Ordinary tokens in id order, starting at id kReservedCount.
  explicit Vocabulary(std::vector<std::string> tokens);

  int id(std::string_view token) const;  // kUnkId if absent
  const std::string& token(int id) const;
  std::size_t size() const { return tokens_.size(); }
  std::vector<int> ids(std::string_view text) const;

  // One ordinary token per line; line i holds id i + kReservedCount.
  void write(std::ostream& out) const;
  std::string serialize() const;
  static Vocabulary read(std::istream& in);

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Frequency-ranked vocabulary of at most max_size entries (reserved
// included); ties broken lexicographically. Throws config error when
// max_size < kReservedCount + 1 and input error when the corpus is empty.
Vocabulary build_vocab(const std::vector<std::string>& corpus, std::size_t max_size);

}  // namespace asrk::encoder
