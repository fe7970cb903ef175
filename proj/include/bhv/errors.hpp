#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bhv {

// Malformed expression text. Carries the byte offset of the first bad token.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Evaluation hit the singular set: ln/sqrt of a non-positive value, division
// by zero, a non-integer power of a non-positive base, a non-positive
// conformal factor, or a rank-deficient chart.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated an operation's precondition (unbound parameter,
// non-minimal input where minimality is required, bad plane section, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Rejection sampling could not find admissible points in the requested box.
class RegionExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bhv
