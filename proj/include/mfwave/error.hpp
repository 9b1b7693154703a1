#pragma once

#include <stdexcept>
#include <string>

namespace mfwave {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration block is missing a field or holds an invalid value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class UnsupportedMoment : public Error {
 public:
  using Error::Error;
};

/// Mass reached the right edge of a mean-field window.
class WindowOverflow : public Error {
 public:
  using Error::Error;
};

class MonotonicityViolation : public Error {
 public:
  using Error::Error;
};

/// The atom bisection could not meet gamma(B_R) = 1.
class BisectionFailure : public Error {
 public:
  using Error::Error;
};

/// Even the smallest representable atom overshoots: the true atom underflows
/// double precision (mass sits against the right edge of the frame).
class AtomUnderflow : public BisectionFailure {
 public:
  using BisectionFailure::BisectionFailure;
};

class BracketNotFound : public Error {
 public:
  using Error::Error;
};

}  // namespace mfwave
