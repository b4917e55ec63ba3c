#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hdpca {

enum class ErrorKind {
  InvalidInput,
  InvalidSpec,
  DegenerateSpike,
  DimensionMismatch,
  RankExceeded,
  DegenerateSignal,
  DegenerateScore,
  InvalidKind,
  DegenerateSpectrum,
  DegenerateInput,
  ParseError,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for all library failures; `kind()` says which
/// contract was violated so callers (the CLI in particular) can map it to an
/// exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::DegenerateSpike: return "DegenerateSpike";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::RankExceeded: return "RankExceeded";
    case ErrorKind::DegenerateSignal: return "DegenerateSignal";
    case ErrorKind::DegenerateScore: return "DegenerateScore";
    case ErrorKind::InvalidKind: return "InvalidKind";
    case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace hdpca
