#pragma once

#include <stdexcept>
#include <string>

namespace povmdyn {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Incompatible or oversized matrix dimensions.
class DimensionError : public Error {
public:
  using Error::Error;
};

// Input violates a documented invariant (non-Hermitian, non-PSD, bad config...).
class ValidationError : public Error {
public:
  using Error::Error;
};

// A computation left its accuracy contract (failed eigensolve, degenerate Gram).
class NumericalError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace povmdyn
