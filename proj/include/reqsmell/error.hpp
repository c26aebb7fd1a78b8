#pragma once

#include <stdexcept>
#include <string>

namespace reqsmell {

/// Raised for every contract violation surfaced to callers (bad input files,
/// shape mismatches, unsatisfiable preconditions).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace reqsmell
