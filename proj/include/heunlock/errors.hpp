#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace heunlock {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

class InvalidParameterError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "InvalidParameterError"; }
};

/// A denominator of a recurrence factor (or a Gamma-ratio factor) fell below
/// the singularity floor. Callers recover through the regularized path.
class NearPoleError : public Error {
 public:
  NearPoleError(std::int64_t index, double modulus);
  std::int64_t index() const noexcept { return index_; }
  double modulus() const noexcept { return modulus_; }
  const char* kind() const noexcept override { return "NearPoleError"; }

 private:
  std::int64_t index_;
  double modulus_;
};

class TruncationLimitError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "TruncationLimitError"; }
};

/// Evaluation point outside the certified annulus.
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "DomainError"; }
};

class MonodromyMismatchError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "MonodromyMismatchError"; }
};

class SolutionPoleError : public Error {
 public:
  SolutionPoleError(double t, const std::string& what);
  double where() const noexcept { return t_; }
  const char* kind() const noexcept override { return "SolutionPoleError"; }

 private:
  double t_;
};

class WindingUnresolvedError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "WindingUnresolvedError"; }
};

/// A discriminant root was found outside |kappa| <= 1/(2 omega).
class ConjectureViolationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "ConjectureViolationError"; }
};

class IntegrationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "IntegrationError"; }
};

}  // namespace heunlock
