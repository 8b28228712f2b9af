#pragma once

#include <stdexcept>
#include <string>

namespace tcl {

// Malformed file, dataset, or on-disk artifact.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values or a failed numeric verification.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void check_arg(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

inline void check_data(bool ok, const std::string& msg) {
  if (!ok) throw DataError(msg);
}

inline void check_numeric(bool ok, const std::string& msg) {
  if (!ok) throw NumericError(msg);
}

}  // namespace tcl
