#pragma once

#include <stdexcept>
#include <string>

namespace multires {

// Base type for every error the library raises.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A precondition or argument violation (bad dimensions, duplicate levels, ...).
struct InvalidInputError : Error {
  using Error::Error;
};

// Non-positive cutoff handed to filter construction.
struct InvalidCutoffError : InvalidInputError {
  using InvalidInputError::InvalidInputError;
};

// Input text that is not syntactically valid (XML, JSONL, CSV). Carries the
// 1-based line where parsing stopped.
struct ParseError : Error {
  ParseError(const std::string& message, int line_number)
      : Error(message), line(line_number) {}
  int line;
};

// Syntactically valid input that violates the expected schema (missing
// element, value out of range, unknown class, ...).
struct SchemaError : Error {
  using Error::Error;
};

// A referenced file or id does not exist.
struct NotFoundError : Error {
  using Error::Error;
};

// A byte stream in a format variant the toolkit deliberately does not handle
// (16-bit depth, interlacing, palettes, ...).
struct UnsupportedFormatError : Error {
  using Error::Error;
};

// A byte stream that claims a supported format but is corrupt or truncated.
struct DecodeError : Error {
  using Error::Error;
};

// More than the allowed number of detections for one (image, model) pair.
struct CapViolationError : Error {
  using Error::Error;
};

}  // namespace multires
