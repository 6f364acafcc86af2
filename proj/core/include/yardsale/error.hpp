#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace yardsale {

enum class ErrorKind {
  InvalidSize,
  InvalidParameter,
  GenerationFailure,
  Dimension,
  Domain,
  InsufficientData,
  DegenerateInput,
  NotApplicable,
  Index,
  FitFailure,
  NonConvergence,
  Io,
};

/// Stable, machine-readable tag for an error kind ("invalid-size", ...).
std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure the library reports on purpose is one of these; anything
/// else escaping the library is a bug.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace yardsale
