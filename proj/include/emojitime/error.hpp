#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace emojitime {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input. `location` is a line number or byte offset depending on
/// the format; zero when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t location = 0)
      : Error(what), location_(location) {}
  std::size_t location() const noexcept { return location_; }

 private:
  std::size_t location_;
};

/// Raised by training loops when the loss stops being finite.
class DivergenceError : public Error {
 public:
  DivergenceError() : Error("divergence") {}
};

}  // namespace emojitime
