#include "yardsale/error.hpp"

namespace yardsale {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidSize: return "invalid-size";
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::GenerationFailure: return "generation-failure";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::DegenerateInput: return "degenerate-input";
    case ErrorKind::NotApplicable: return "not-applicable";
    case ErrorKind::Index: return "index";
    case ErrorKind::FitFailure: return "fit-failure";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace yardsale
