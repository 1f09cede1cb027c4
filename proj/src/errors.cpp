#include "asrk/errors.hpp"

namespace asrk {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension: return "dimension error";
    case ErrorKind::rank: return "rank error";
    case ErrorKind::label: return "label error";
    case ErrorKind::empty_pool: return "empty-pool error";
    case ErrorKind::unstepped_parameter: return "unstepped-parameter error";
    case ErrorKind::vocabulary: return "vocabulary error";
    case ErrorKind::config: return "config error";
    case ErrorKind::input: return "input error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::value: return "value error";
    case ErrorKind::io: return "io error";
    case ErrorKind::incompatibility: return "incompatibility error";
    case ErrorKind::alignment: return "alignment error";
  }
  return "error";
}

}  // namespace asrk
