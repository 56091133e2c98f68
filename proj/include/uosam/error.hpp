#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uosam {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  EmptyMask,
  EmptyForeground,
  EmptyProposal,
  NoObject,
  BackendFailure,
  Truncated,
  Oversize,
  LabelOutOfRange,
  NoScoredClasses,
  NoScoredPixels,
  PlacementFailure,
  UnpairedFiles,
  Io,
  Config,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const char* what) {
  if (!condition) fail(code, what);
}

}  // namespace uosam
