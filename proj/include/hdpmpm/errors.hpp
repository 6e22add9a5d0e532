#pragma once

#include <stdexcept>
#include <string>

namespace hdpmpm {

// Invalid input data or file contents (CSV, dictionary, draw files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Arithmetic breakdown inside the sampler (zero normalizers, non-finite terms).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The chain hit the truncation ceiling and the policy did not allow recovery.
class SaturationError : public NumericalError {
 public:
  SaturationError(const std::string& what, long sweep, int occupied, int k, int restarts)
      : NumericalError(what), sweep(sweep), occupied(occupied), k(k), restarts(restarts) {}

  long sweep;
  int occupied;
  int k;
  int restarts;
};

}  // namespace hdpmpm
