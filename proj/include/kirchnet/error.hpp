#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kirchnet {

enum class ErrorKind {
  NonPositiveWeight,
  IsolatedVertex,
  DuplicateEdgeKey,
  UnknownVertex,
  UnknownEdge,
  CoordinateOutOfRange,
  Disconnected,
  MeshMismatch,
  AtomOffNetwork,
  MeshTooCoarse,
  DensityOutOfRange,
  RuleShapeMismatch,
  CFLViolation,
  EmptyLedger,
  SupportTooWide,
  TooFewCells,
  InvalidArgument,
  Parse,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

/// Raised by the text readers. `line` is 1-based; 0 means the whole input.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& message,
             ErrorKind cause = ErrorKind::Parse);

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }
  /// The underlying domain error (e.g. NonPositiveWeight) or Parse.
  ErrorKind cause() const noexcept { return cause_; }

 private:
  std::string source_;
  std::size_t line_;
  ErrorKind cause_;
};

}  // namespace kirchnet
