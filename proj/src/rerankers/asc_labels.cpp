#include "asrk/rerankers/asc_labels.hpp"

#include <string>

#include "asrk/errors.hpp"

namespace asrk::rerankers {

std::string_view to_string(AscScheme scheme) {
  return scheme == AscScheme::four_way ? "four_way" : "fever_three_way";
}

AscScheme parse_asc_scheme(std::string_view text) {
  if (text == "four_way") return AscScheme::four_way;
  if (text == "fever_three_way") return AscScheme::fever_three_way;
  throw Error(ErrorKind::config, "unknown ASC scheme '" + std::string(text) + "'", "asc_scheme");
}

}  // namespace asrk::rerankers
