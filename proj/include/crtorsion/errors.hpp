#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crtorsion {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inverting a series whose lowest stored coefficient is zero.
class SingularLeadError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// Wrong number of samples, terms or coefficients.
class ArityError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double partial_estimate, double error_estimate)
      : Error(what), partial_(partial_estimate), error_(error_estimate) {}

  double partial_estimate() const noexcept { return partial_; }
  double error_estimate() const noexcept { return error_; }

 private:
  double partial_;
  double error_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row) : Error(what), row_(row) {}

  /// 1-based line number in the input stream.
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class EmptyDegreeError : public Error {
 public:
  using Error::Error;
};

class UnsupportedTailError : public Error {
 public:
  using Error::Error;
};

}  // namespace crtorsion
