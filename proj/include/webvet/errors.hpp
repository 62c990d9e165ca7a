#pragma once

#include <stdexcept>
#include <string>

namespace webvet {

// Base for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaError : Error {
  using Error::Error;
};

struct UnparseableDate : Error {
  explicit UnparseableDate(const std::string& raw)
      : Error("unparseable date: '" + raw + "'"), raw(raw) {}
  std::string raw;
};

struct UncoercibleValue : Error {
  UncoercibleValue(std::string field_name, std::string raw_value)
      : Error("cannot coerce field '" + field_name + "' value '" + raw_value + "'"),
        field(std::move(field_name)),
        raw(std::move(raw_value)) {}
  std::string field;
  std::string raw;
};

/// Transport, auth, or missing-fixture failure talking to a model provider.
struct ProviderError : Error {
  using Error::Error;
};

/// The model never produced a response matching the requested shape.
struct ParseExhausted : Error {
  using Error::Error;
};

struct ContextError : Error {
  explicit ContextError(std::string field_name)
      : Error("context response is missing field '" + field_name + "'"), field(std::move(field_name)) {}
  std::string field;
};

struct PlanRejected : Error {
  using Error::Error;
};

struct LookupFailed : Error {
  using Error::Error;
};

struct ApplyFailed : Error {
  using Error::Error;
};

/// Dataset-level problem detected before any model call (unreadable input, bad URL column).
struct DatasetError : Error {
  using Error::Error;
};

struct RulepackError : Error {
  using Error::Error;
};

struct FormulaError : Error {
  using Error::Error;
};

}  // namespace webvet
