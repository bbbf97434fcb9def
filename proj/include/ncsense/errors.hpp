#pragma once

#include <stdexcept>
#include <string>

namespace ncsense {

// Malformed config file or --set override (bad key, bad value, bad syntax).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A config that parsed but violates one or more invariants.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Occupancy patterns that need an even split (N_m/2 edge rows, M_sym/2 columns).
class ParityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Nothing to estimate from: every column/row is zero, or the reconstruction
// produced an all-zero spectrum.
class NoDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateOperatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ncsense
