#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace masr {

enum class ErrorKind {
  InvalidArgument,
  // manifest / core validation
  EmptyManifest,
  IndexGap,
  NonMonotonicTimestamps,
  InvalidFps,
  // numerics
  TooFewFrames,
  DimMismatch,
  EmptyCluster,
  ZeroVector,
  OutOfRange,
  // focusing
  MissingFeature,
  EmptyCandidates,
  UnparseableSelection,
  EmptySelection,
  // backends
  Transport,
  BadStatus,
  EmptyReply,
  MalformedResponse,
  MissingImage,
  DimInconsistent,
  MissingApiKey,
  // reflector
  TemplateError,
  Unparseable,
  // bench / io
  ParseError,
  MissingManifest,
  InfeasiblePlacement,
  IdMismatch,
  ConfigError,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers and tests
// can branch on the category without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// HTTP status failures keep the status code around for retry decisions.
class StatusError : public Error {
 public:
  StatusError(int status, const std::string& message)
      : Error(ErrorKind::BadStatus, message), status_(status) {}

  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace masr
