#pragma once

#include <stdexcept>
#include <string>

namespace screenclean {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  ConstantColumn,
  TooFewRows,
  ModelTooLarge,
  SingularGram,
  ZeroResidualVariance,
  NotSymmetric,
  TooManySubsets,
  NoConvergence,
  EmptyPilot,
  EmptyModel,
  EmptyPath,
  DomainError,
  MissingColumn,
  Parse,
  Io,
};

const char* to_string(ErrorKind kind);

/// Input or configuration problems, as opposed to numerical failures.
bool is_data_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace screenclean
