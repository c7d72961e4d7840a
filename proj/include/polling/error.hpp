// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_ERROR_HPP
#define POLLING_ERROR_HPP

#include <stdexcept>
#include <string>

namespace polling {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration file or missing/ill-typed key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A model/policy pair that violates an admissibility condition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of an operation (negative LST argument, bad order, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver did not reach its tolerance within the iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace polling

#endif  // POLLING_ERROR_HPP
