#include "creepdb/error.hpp"

namespace creepdb {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Precondition: return "Precondition";
    case ErrorCode::DuplicateDoi: return "DuplicateDoi";
    case ErrorCode::MalformedManifest: return "MalformedManifest";
    case ErrorCode::MissingAsset: return "MissingAsset";
    case ErrorCode::BackendFailure: return "BackendFailure";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::ToolScopeViolation: return "ToolScopeViolation";
    case ErrorCode::MissingTruth: return "MissingTruth";
    case ErrorCode::UndefinedMetric: return "UndefinedMetric";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonDimensionlessArgument: return "NonDimensionlessArgument";
    case ErrorCode::UnknownUnit: return "UnknownUnit";
    case ErrorCode::UnboundSymbol: return "UnboundSymbol";
    case ErrorCode::DegenerateAnchors: return "DegenerateAnchors";
    case ErrorCode::NonPositiveLogAnchor: return "NonPositiveLogAnchor";
    case ErrorCode::SeriesNotFound: return "SeriesNotFound";
    case ErrorCode::AmbiguousTarget: return "AmbiguousTarget";
    case ErrorCode::EmptyAfterCleaning: return "EmptyAfterCleaning";
    case ErrorCode::ImageIo: return "ImageIo";
    case ErrorCode::NumericalOverflow: return "NumericalOverflow";
    case ErrorCode::DegenerateObservations: return "DegenerateObservations";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::UnknownDoi: return "UnknownDoi";
    case ErrorCode::ConstraintViolation: return "ConstraintViolation";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Conflict: return "Conflict";
    case ErrorCode::StoreUnavailable: return "StoreUnavailable";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

ParseError::ParseError(std::size_t position, const std::string& message)
    : Error(ErrorCode::ParseError,
            message + " at position " + std::to_string(position)),
      position_(position) {}

DimensionError::DimensionError(ErrorCode code, std::string location, std::string subtree,
                               const std::string& message)
    : Error(code, message + " at " + location + " [" + subtree + "]"),
      location_(std::move(location)),
      subtree_(std::move(subtree)) {}

}  // namespace creepdb
