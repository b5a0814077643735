#pragma once

#include <stdexcept>
#include <string>

namespace kinebeat {

/// Raised for malformed or invalid user input (files, flags, shapes).
/// The CLI maps it to exit code 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a numerical procedure cannot produce a meaningful result,
/// e.g. training divergence or an envelope without periodicity.
class ComputeError : public std::runtime_error {
 public:
  explicit ComputeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kinebeat
