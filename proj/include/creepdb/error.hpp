#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace creepdb {

enum class ErrorCode {
  Precondition,
  // corpus
  DuplicateDoi,
  MalformedManifest,
  MissingAsset,
  // skills / backend
  BackendFailure,
  SchemaViolation,
  ToolScopeViolation,
  // screening
  MissingTruth,
  UndefinedMetric,
  // formula
  ParseError,
  DimensionMismatch,
  NonDimensionlessArgument,
  UnknownUnit,
  UnboundSymbol,
  // digitizer
  DegenerateAnchors,
  NonPositiveLogAnchor,
  SeriesNotFound,
  AmbiguousTarget,
  EmptyAfterCleaning,
  ImageIo,
  // models
  NumericalOverflow,
  DegenerateObservations,
  SingularJacobian,
  // store
  UnknownDoi,
  ConstraintViolation,
  NotFound,
  Conflict,
  StoreUnavailable,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. `code()` is the machine-readable
/// reason; `what()` carries the human detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  /// what() without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// Syntax error in a formula or unit string; `position` is a 0-based byte
/// offset into the input.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& message);

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Dimensional failure located at a subtree of an expression. `location` is a
/// slash-separated path from the root ("rhs/mul.1/exp.0").
class DimensionError : public Error {
 public:
  DimensionError(ErrorCode code, std::string location, std::string subtree,
                 const std::string& message);

  const std::string& location() const noexcept { return location_; }
  const std::string& subtree() const noexcept { return subtree_; }

 private:
  std::string location_;
  std::string subtree_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) {
  throw Error(code, detail);
}

inline void require(bool condition, const std::string& detail) {
  if (!condition) throw Error(ErrorCode::Precondition, detail);
}

}  // namespace creepdb
