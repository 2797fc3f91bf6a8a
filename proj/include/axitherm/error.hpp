#pragma once

#include <stdexcept>
#include <string>

namespace axitherm {

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid user input (configuration, command-line values, file contents).
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(what) {}
};

}  // namespace axitherm
