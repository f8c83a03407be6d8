#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairgap {

enum class ErrorKind {
  kIo,                // file missing or unwritable
  kFormat,            // malformed input document
  kSchema,            // required columns or configuration keys missing / unknown
  kConfig,            // invalid parameter value
  kEmptyCohort,       // cohort filter removed every record
  kStratification,    // a (group, label) cell is too small to split
  kDimension,         // vector lengths disagree
  kShape,             // matrix shapes disagree
  kArity,             // wrong number of groups or empty inputs
  kDegenerateLabels,  // a single class where two are required
  kDegenerateGroup,   // a group is absent where every group is required
  kEmptyFront,        // no point has a defined value for a notion
  kType,              // variable has the wrong type for the operation
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Process exit code for an error: 2 input/schema, 3 analysis-degenerate, 1 other.
int exit_code_for(ErrorKind kind);

}  // namespace fairgap
