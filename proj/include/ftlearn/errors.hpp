#pragma once

#include <stdexcept>
#include <string>

namespace ftlearn {

/** Base class for all errors thrown by this library. */
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Schema or configuration file violates its contract.
struct SchemaError : Error {
  using Error::Error;
};

/// Input data violates a precondition (empty column, degenerate labels, ...).
struct DataError : Error {
  using Error::Error;
};

/// Malformed CSV or JSON input; the message carries a location.
struct ParseError : Error {
  using Error::Error;
};

/// The learner could not find an acceptable top gate. Callers usually
/// treat this as a documented skip rather than a failure.
struct NoSignificantStructure : Error {
  using Error::Error;
};

}  // namespace ftlearn
