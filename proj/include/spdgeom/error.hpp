#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spdgeom {

// Failure categories surfaced by the library. The CLI prints these as
// `ERROR <Kind>: message`.
enum class ErrorKind {
  AsymmetricInput,
  NotPositiveDefinite,
  ConvergenceFailure,
  Overflow,
  DimensionMismatch,
  EmptySet,
  NoConvergence,
  RankDeficient,
  DegenerateSplit,
  SingularSystem,
  SingleClass,
  ManifestError,
  NonFiniteValue,
  FormatError,
  EmptyImage,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace spdgeom
