#ifndef GAZECOMP_ERROR_HPP
#define GAZECOMP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace gazecomp {

/// Root of the library's exception hierarchy. The CLI maps the subclasses
/// onto exit codes (usage 1, data 2, numeric 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor operands that do not conform to a primitive.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed input files or inconsistent corpora.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite losses or gradients, failed gradient checks.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace gazecomp

#endif  // GAZECOMP_ERROR_HPP
