#pragma once

#include <stdexcept>
#include <string>

namespace hfvp {

/// Bad caller input: non-finite coordinates, out-of-domain parameters.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Join/meet of (nearly) parallel or antipodal vectors.
class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Operation requested on a prior/mode that cannot support it
/// (e.g. a MAP horizon from the no-context prior).
class UnsupportedMode : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hfvp
