#pragma once

#include <stdexcept>
#include <string>

namespace assembler {

enum class ErrorCode {
  kInvalidArgument = 1,
  kDegenerateConfiguration = 2,
  kSingularConfiguration = 3,
  kConvergenceFailure = 4,
  kParse = 5,
  kIo = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorCode::kInvalidArgument, what) {}
};

class DegenerateConfiguration : public Error {
 public:
  explicit DegenerateConfiguration(const std::string& what)
      : Error(ErrorCode::kDegenerateConfiguration, what) {}
};

// Statics equilibrium matrix too ill-conditioned to solve.
class SingularConfiguration : public Error {
 public:
  SingularConfiguration(const std::string& what, int platform_index)
      : Error(ErrorCode::kSingularConfiguration, what), platform_index_(platform_index) {}
  int platform_index() const noexcept { return platform_index_; }

 private:
  int platform_index_;
};

class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double residual)
      : Error(ErrorCode::kConvergenceFailure, what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorCode::kParse, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

}  // namespace assembler
