#pragma once

#include <stdexcept>
#include <string>

namespace rbkit {

/// Base class for every error this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or contract-violating input (bad matrices, bad files, size
/// mismatches). The CLI maps these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Numerically impossible request (singular solve, out-of-domain target).
/// The CLI maps these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class InvariantViolation final : public InputError {
 public:
  using InputError::InputError;
};

class NotSkewSymmetric final : public InputError {
 public:
  using InputError::InputError;
};

class BadStructure final : public InputError {
 public:
  using InputError::InputError;
};

class ZeroTwist final : public InputError {
 public:
  using InputError::InputError;
};

class DimensionMismatch final : public InputError {
 public:
  using InputError::InputError;
};

class NotCentered final : public InputError {
 public:
  using InputError::InputError;
};

class MissingMassData final : public InputError {
 public:
  using InputError::InputError;
};

class ParseError final : public InputError {
 public:
  using InputError::InputError;
};

class SchemaError final : public InputError {
 public:
  using InputError::InputError;
};

class SingularJacobian final : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NearPiRotation final : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class PureTranslation final : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class Unreachable final : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateTarget final : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonPositiveDamping final : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace rbkit
