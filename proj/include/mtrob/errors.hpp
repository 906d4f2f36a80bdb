#pragma once

#include <stdexcept>
#include <string>

namespace mtrob {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite or otherwise malformed data handed to an operation.
struct InputError : Error {
  using Error::Error;
};

// Scalar parameter outside its documented range (sigma < 0, p outside [0,1], ...).
struct ParameterError : Error {
  using Error::Error;
};

// Incompatible matrix/vector shapes.
struct DimensionError : Error {
  using Error::Error;
};

// Request outside the analysis regime (k >= T: infinitely many solutions).
struct RegimeError : Error {
  using Error::Error;
};

// Rank-deficient or singular input where full rank is required.
struct DegeneracyError : Error {
  using Error::Error;
};

// A documented precondition on the object itself is violated
// (e.g. representation rows not orthonormal).
struct ContractError : Error {
  using Error::Error;
};

// Training objective blew up.
struct DivergenceError : Error {
  using Error::Error;
};

// Malformed file contents (bad magic, truncation, unparsable fields).
struct FormatError : Error {
  using Error::Error;
};

// Filesystem-level failures (missing path, unwritable output).
struct IoError : Error {
  using Error::Error;
};

}  // namespace mtrob
