#pragma once

#include <cstddef>
#include <string_view>

namespace asrk::rerankers {

// Label schemes for (target, candidate) answer pairs.
//   four_way:        0 both correct, 1 target only, 2 candidate only, 3 neither
//   fever_three_way: 0 target correct, 1 target wrong and candidate correct,
//                    2 both wrong (FEVER support / refute / not-enough-info)
enum class AscScheme { four_way, fever_three_way };

constexpr std::size_t num_classes(AscScheme scheme) {
  return scheme == AscScheme::four_way ? 4 : 3;
}

constexpr int derive_asc_label(bool target_correct, bool candidate_correct, AscScheme scheme) {
  if (scheme == AscScheme::four_way) {
    if (target_correct) return candidate_correct ? 0 : 1;
    return candidate_correct ? 2 : 3;
  }
  if (target_correct) return 0;
  return candidate_correct ? 1 : 2;
}

std::string_view to_string(AscScheme scheme);
// Accepts "four_way" / "fever_three_way"; throws config error otherwise.
AscScheme parse_asc_scheme(std::string_view text);

}  // namespace asrk::rerankers
