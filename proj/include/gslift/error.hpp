#pragma once

#include <stdexcept>
#include <string>

namespace gslift {

// Error code namespacing: category is what the CLI prints as
// "error:<category>:<detail>", code discriminates within a category.
enum class ErrorCode {
  file_missing,
  file_io,
  bad_magic,
  bad_version,
  truncated,
  malformed,
  dimension_mismatch,
  unknown_key,
  bad_value,
  out_of_range,
  degenerate_rank,
  empty_mask,
  missing_input,
  usage,
};

inline const char* error_category(ErrorCode c) {
  switch (c) {
    case ErrorCode::file_missing:
    case ErrorCode::file_io:
      return "file";
    case ErrorCode::bad_magic:
    case ErrorCode::bad_version:
    case ErrorCode::truncated:
    case ErrorCode::malformed:
      return "format";
    case ErrorCode::dimension_mismatch:
      return "dimension";
    case ErrorCode::unknown_key:
    case ErrorCode::bad_value:
      return "config";
    case ErrorCode::out_of_range:
      return "range";
    case ErrorCode::degenerate_rank:
      return "rank";
    case ErrorCode::empty_mask:
      return "mask";
    case ErrorCode::missing_input:
      return "input";
    case ErrorCode::usage:
      return "usage";
  }
  return "internal";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_category(code)) + ":" + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }
  // Formatted as the CLI prints it on stderr.
  std::string formatted() const {
    return std::string("error:") + error_category(code_) + ":" + detail_;
  }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace gslift
