#pragma once

#include <stdexcept>
#include <string>

namespace gmtlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad dimension, r <= 0, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// The symmetric part of a coefficient matrix is not positive definite.
class EllipticityError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine (LP, optimizer, quadrature) failed to produce a result.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// The gradient vanishes on the whole sampled zero set.
class DegenerateVariety : public Error {
 public:
  using Error::Error;
};

/// A logarithm of a zero density was requested.
class LogDivergence : public Error {
 public:
  using Error::Error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidInput(what);
}

}  // namespace gmtlab
