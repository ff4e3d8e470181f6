#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace logz {

enum class ErrorCode {
  kConfig,
  kValidation,
  kParse,
  kDomain,
  kOptimization,
  kDivergence,
  kOracleUnavailable,
  kContract,
  kIo,
  kClosedForm,
};

/// Base class of every error raised by the library. The code survives the
/// trip through the C API, the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::kConfig, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorCode::kValidation, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::kDomain, what) {}
};

class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what) : Error(ErrorCode::kContract, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

class OracleUnavailable : public Error {
 public:
  explicit OracleUnavailable(const std::string& what)
      : Error(ErrorCode::kOracleUnavailable, what) {}
};

/// Raised when m == L: the target is an isotropic Gaussian and no annealing
/// schedule exists.
class ClosedFormTarget : public Error {
 public:
  explicit ClosedFormTarget(const std::string& what) : Error(ErrorCode::kClosedForm, what) {}
};

/// CSV parse failure. row and column are 1-based; row 1 is the header.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : Error(ErrorCode::kParse, what), row_(row), column_(column) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class OptimizationFailure : public Error {
 public:
  OptimizationFailure(const std::string& what, Eigen::VectorXd best_iterate, double gradient_norm)
      : Error(ErrorCode::kOptimization, what),
        best_iterate_(std::move(best_iterate)),
        gradient_norm_(gradient_norm) {}
  const Eigen::VectorXd& best_iterate() const noexcept { return best_iterate_; }
  double gradient_norm() const noexcept { return gradient_norm_; }

 private:
  Eigen::VectorXd best_iterate_;
  double gradient_norm_;
};

/// A chain produced a non-finite coordinate. phase is -1 when unknown.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int phase, std::uint64_t step)
      : Error(ErrorCode::kDivergence, what), phase_(phase), step_(step) {}
  int phase() const noexcept { return phase_; }
  std::uint64_t step() const noexcept { return step_; }

 private:
  int phase_;
  std::uint64_t step_;
};

}  // namespace logz
