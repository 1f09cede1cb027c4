#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace asrk {

enum class ErrorKind {
  dimension,
  rank,
  label,
  empty_pool,
  unstepped_parameter,
  vocabulary,
  config,
  input,
  parse,
  value,
  io,
  incompatibility,
  alignment,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; `kind()` drives CLI exit codes and
// `code()` carries the short validation name when one applies.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string code = {})
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

}  // namespace asrk
