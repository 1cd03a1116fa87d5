#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hgc {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: out-of-domain parameters, inconsistent dimensions,
// malformed documents. The CLI maps these to exit status 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DivisibilityError : public ValidationError {
 public:
  DivisibilityError(const std::string& what, int edge, std::int64_t suggested)
      : ValidationError(what), edge_(edge), suggested_datasets_(suggested) {}
  int edge() const { return edge_; }
  std::int64_t suggested_datasets() const { return suggested_datasets_; }

 private:
  int edge_;
  std::int64_t suggested_datasets_;
};

class InfeasibleToleranceError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnknownKindError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class MissingPartialError : public ValidationError {
 public:
  MissingPartialError(const std::string& what, std::vector<int> missing)
      : ValidationError(what), missing_(std::move(missing)) {}
  const std::vector<int>& missing() const { return missing_; }

 private:
  std::vector<int> missing_;
};

class ConstructionError : public Error {
 public:
  using Error::Error;
};

class DecodeSingularError : public Error {
 public:
  DecodeSingularError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class NoFeasibleToleranceError : public Error {
 public:
  using Error::Error;
};

class TooLargeError : public Error {
 public:
  using Error::Error;
};

}  // namespace hgc
