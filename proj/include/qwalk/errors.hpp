#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace qwalk {

/// Base class for every error raised by the library. Each error carries a
/// short machine-readable code and, where it makes sense, the path of the
/// offending configuration field.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message, std::string path = {})
      : std::runtime_error(message), code_(std::move(code)), path_(std::move(path)) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& path() const noexcept { return path_; }

 private:
  std::string code_;
  std::string path_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message, std::string path = {})
      : Error("domain_error", message, std::move(path)) {}

 protected:
  DomainError(std::string code, const std::string& message, std::string path)
      : Error(std::move(code), message, std::move(path)) {}
};

/// Input data violates a structural invariant (e.g. a non-unitary coin).
class ValidationError : public DomainError {
 public:
  explicit ValidationError(const std::string& message, std::string path = {})
      : DomainError("validation_error", message, std::move(path)) {}
};

/// The requested case is mathematically valid but not handled by this code path.
class UnsupportedCaseError : public DomainError {
 public:
  explicit UnsupportedCaseError(const std::string& message)
      : DomainError("unsupported_case", message, {}) {}
};

/// A periodic transform would wrap significant mass around its window.
class AliasingError : public DomainError {
 public:
  explicit AliasingError(const std::string& message)
      : DomainError("aliasing_error", message, {}) {}
};

/// Lattice window would exceed the configured maximum.
class ResourceError : public Error {
 public:
  explicit ResourceError(const std::string& message)
      : Error("resource_error", message) {}
};

/// A numerical gate (convergence, consistency, mass budget) was not met.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& message)
      : Error("convergence_error", message) {}

 protected:
  ConvergenceError(std::string code, const std::string& message)
      : Error(std::move(code), message) {}
};

class InconsistencyError : public ConvergenceError {
 public:
  explicit InconsistencyError(const std::string& message)
      : ConvergenceError("inconsistency_error", message) {}
};

class MassDefectError : public ConvergenceError {
 public:
  explicit MassDefectError(const std::string& message)
      : ConvergenceError("mass_defect", message) {}
};

/// Malformed configuration text.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::string path = {})
      : Error("parse_error", message, std::move(path)) {}
};

}  // namespace qwalk
