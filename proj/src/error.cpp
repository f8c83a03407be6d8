#include "fairgap/error.hpp"

namespace fairgap {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "io";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kEmptyCohort: return "empty-cohort";
    case ErrorKind::kStratification: return "stratification";
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kArity: return "arity";
    case ErrorKind::kDegenerateLabels: return "degenerate-labels";
    case ErrorKind::kDegenerateGroup: return "degenerate-group";
    case ErrorKind::kEmptyFront: return "empty-front";
    case ErrorKind::kType: return "type";
  }
  return "unknown";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo:
    case ErrorKind::kFormat:
    case ErrorKind::kSchema:
    case ErrorKind::kConfig:
    case ErrorKind::kEmptyCohort:
      return 2;
    case ErrorKind::kStratification:
    case ErrorKind::kDegenerateLabels:
    case ErrorKind::kDegenerateGroup:
    case ErrorKind::kEmptyFront:
      return 3;
    default:
      return 1;
  }
}

}  // namespace fairgap
