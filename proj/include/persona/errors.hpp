#pragma once

#include <stdexcept>

namespace persona {

// Malformed or inconsistent input data (files, ids, labels).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values during a forward pass or training.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace persona
