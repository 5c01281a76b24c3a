#include "kgens/error.hpp"

namespace kgens {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::Io: return "Io";
  case ErrorKind::BadMagic: return "BadMagic";
  case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
  case ErrorKind::UnsupportedDtype: return "UnsupportedDtype";
  case ErrorKind::Truncated: return "Truncated";
  case ErrorKind::NonFinite: return "NonFinite";
  case ErrorKind::Parse: return "Parse";
  case ErrorKind::DuplicateId: return "DuplicateId";
  case ErrorKind::InvalidLabel: return "InvalidLabel";
  case ErrorKind::MissingSample: return "MissingSample";
  case ErrorKind::ExtraSample: return "ExtraSample";
  case ErrorKind::UnknownSource: return "UnknownSource";
  case ErrorKind::DimensionMismatch: return "DimensionMismatch";
  case ErrorKind::InvalidArgument: return "InvalidArgument";
  case ErrorKind::EmptySplit: return "EmptySplit";
  case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
  case ErrorKind::Degenerate: return "Degenerate";
  case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, std::string(to_string(kind)) + ": " + message);
}

} // namespace kgens
