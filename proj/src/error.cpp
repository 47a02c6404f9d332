#include "evloc/error.hpp"

namespace evloc {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::DegenerateWidth: return "DegenerateWidth";
    case ErrorKind::EmptyEvents: return "EmptyEvents";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::NumericalError: return "NumericalError";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::LayoutError: return "LayoutError";
    case ErrorKind::EmptyResult: return "EmptyResult";
    case ErrorKind::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::SchemaError: return "SchemaError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace evloc
