#pragma once

#include <stdexcept>
#include <string>

namespace ssc {

// Shapes, dims or grids that do not line up.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed files, bad configuration, invalid combinations of options.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Options that are individually valid but cannot be combined.
class UsageError : public DataError {
 public:
  using DataError::DataError;
};

// NaN/Inf in a loss, metric or gradient.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ssc
