#include "kirchnet/error.hpp"

#include <utility>

namespace kirchnet {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorKind::IsolatedVertex: return "IsolatedVertex";
    case ErrorKind::DuplicateEdgeKey: return "DuplicateEdgeKey";
    case ErrorKind::UnknownVertex: return "UnknownVertex";
    case ErrorKind::UnknownEdge: return "UnknownEdge";
    case ErrorKind::CoordinateOutOfRange: return "CoordinateOutOfRange";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::MeshMismatch: return "MeshMismatch";
    case ErrorKind::AtomOffNetwork: return "AtomOffNetwork";
    case ErrorKind::MeshTooCoarse: return "MeshTooCoarse";
    case ErrorKind::DensityOutOfRange: return "DensityOutOfRange";
    case ErrorKind::RuleShapeMismatch: return "RuleShapeMismatch";
    case ErrorKind::CFLViolation: return "CFLViolation";
    case ErrorKind::EmptyLedger: return "EmptyLedger";
    case ErrorKind::SupportTooWide: return "SupportTooWide";
    case ErrorKind::TooFewCells: return "TooFewCells";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Io: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      message_(message) {}

ParseError::ParseError(std::string source, std::size_t line, const std::string& message,
                       ErrorKind cause)
    : Error(ErrorKind::Parse,
            source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " +
                (cause == ErrorKind::Parse ? std::string() : std::string(to_string(cause)) + ": ") +
                message),
      source_(std::move(source)),
      line_(line),
      cause_(cause) {}

}  // namespace kirchnet
