#pragma once

#include <stdexcept>
#include <string>

namespace ddinv {

/// Inconsistent matrix/vector shapes or out-of-range indices.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The H-matrix of a C-set has rank below the state dimension.
class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The polyhedron {x : Sx <= 1} admits a recession direction.
class UnboundedSetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Generic rejection of malformed inputs (bad lambda, missing data, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// No gain exists for this data/set combination.
class InfeasibleProblem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The LP solver gave up (iteration cap).
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ddinv
