#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kgens {

enum class ErrorKind {
  Io,
  BadMagic,
  UnsupportedVersion,
  UnsupportedDtype,
  Truncated,
  NonFinite,
  Parse,
  DuplicateId,
  InvalidLabel,
  MissingSample,
  ExtraSample,
  UnknownSource,
  DimensionMismatch,
  InvalidArgument,
  EmptySplit,
  NonFiniteLoss,
  Degenerate,
  Config,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. `kind()` is stable and machine-readable;
/// `what()` carries the human detail (row/column, step, offending id...).
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

} // namespace kgens
