#include "qfreq/errors.hpp"

namespace qfreq {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kIncompatibleGrids: return "incompatible-grids";
    case ErrorKind::kResolution: return "resolution";
    case ErrorKind::kDegenerateMask: return "degenerate-mask";
    case ErrorKind::kDegenerateSplit: return "degenerate-split";
    case ErrorKind::kDependentModes: return "dependent-modes";
    case ErrorKind::kEmptyJsa: return "empty-jsa";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kInvalidBasis: return "invalid-basis";
    case ErrorKind::kUnknownMode: return "unknown-mode";
    case ErrorKind::kInvalidOrder: return "invalid-order";
    case ErrorKind::kPerturbativeValidity: return "perturbative-validity";
    case ErrorKind::kInvalidUnitary: return "invalid-unitary";
    case ErrorKind::kRegistryMismatch: return "registry-mismatch";
    case ErrorKind::kCannotNormalize: return "cannot-normalize";
    case ErrorKind::kUndefinedG2: return "undefined-g2";
    case ErrorKind::kConfigParse: return "config-parse";
  }
  return "unknown";
}

}  // namespace qfreq
