#pragma once

#include <stdexcept>
#include <string>

namespace seqgrasp {

/// File or JSON structure could not be interpreted. Message carries the
/// offending file/field.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// A loaded model violates one of its documented invariants. Message names
/// the invariant.
class InvariantViolation : public std::runtime_error {
 public:
  explicit InvariantViolation(const std::string& what) : std::runtime_error(what) {}
};

/// Dataset/schema/hash mismatches and other bad-input conditions detected
/// past the parsing stage.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace seqgrasp
