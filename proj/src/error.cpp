#include "logcascade/error.hpp"

namespace logcascade {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::PrecisionExhausted: return "precision-exhausted";
    case ErrorKind::SingularityHit: return "singularity-hit";
    case ErrorKind::OverflowGuard: return "overflow-guard";
    case ErrorKind::PreconditionViolation: return "precondition-violation";
    case ErrorKind::LevelNotInH: return "level-not-in-H";
    case ErrorKind::DegenerateInput: return "degenerate-input";
    case ErrorKind::UnsupportedShape: return "unsupported-shape";
    case ErrorKind::SubsequenceOutOfRange: return "subsequence-out-of-range";
    case ErrorKind::LevelOrderViolation: return "level-order-violation";
    case ErrorKind::ConfigInvalid: return "config-invalid";
  }
  return "unknown";
}

}  // namespace logcascade
