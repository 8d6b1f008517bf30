#include "masr/errors.hpp"

namespace masr {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmptyManifest: return "EmptyManifest";
    case ErrorKind::IndexGap: return "IndexGap";
    case ErrorKind::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case ErrorKind::InvalidFps: return "InvalidFps";
    case ErrorKind::TooFewFrames: return "TooFewFrames";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::EmptyCluster: return "EmptyCluster";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::MissingFeature: return "MissingFeature";
    case ErrorKind::EmptyCandidates: return "EmptyCandidates";
    case ErrorKind::UnparseableSelection: return "UnparseableSelection";
    case ErrorKind::EmptySelection: return "EmptySelection";
    case ErrorKind::Transport: return "Transport";
    case ErrorKind::BadStatus: return "BadStatus";
    case ErrorKind::EmptyReply: return "EmptyReply";
    case ErrorKind::MalformedResponse: return "MalformedResponse";
    case ErrorKind::MissingImage: return "MissingImage";
    case ErrorKind::DimInconsistent: return "DimInconsistent";
    case ErrorKind::MissingApiKey: return "MissingApiKey";
    case ErrorKind::TemplateError: return "TemplateError";
    case ErrorKind::Unparseable: return "Unparseable";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingManifest: return "MissingManifest";
    case ErrorKind::InfeasiblePlacement: return "InfeasiblePlacement";
    case ErrorKind::IdMismatch: return "IdMismatch";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace masr
