#pragma once

#include <stdexcept>
#include <string>

namespace terraclass {

/// Base for all data errors raised by the library (malformed files, corrupt
/// models, inconsistent inputs). Precondition violations on arguments use
/// std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace terraclass
