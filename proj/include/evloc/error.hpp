// Error taxonomy shared by every evloc module.
//
// All failures surface as evloc::Error carrying an ErrorKind; the CLI maps
// kinds onto process exit codes (2 validation, 3 numerical).

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace evloc {

enum class ErrorKind {
  InvalidParameter,
  DegenerateWidth,
  EmptyEvents,
  ShapeError,
  EmptyBatch,
  NumericalError,
  EmptyDataset,
  LayoutError,
  EmptyResult,
  EmptyGroundTruth,
  IoError,
  FormatError,
  SchemaError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Throws Error(kind, message) when `condition` is false.
inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace evloc
