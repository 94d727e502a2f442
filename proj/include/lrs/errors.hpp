#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lrs {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid or mismatched configuration: bad field parameters, elements from
// different fields mixed in one operation, inconsistent run options.
struct ConfigError : Error {
  using Error::Error;
};

// A value outside an operation's domain: inverse of zero, dimension mismatch,
// zero coordinate where nonzero is required, empty constraint set, malformed
// leakage-function descriptor.
struct DomainError : Error {
  using Error::Error;
};

// A caller violated a stated precondition (e.g. reconstructing views for share
// pairs whose inner products differ).
struct PreconditionError : Error {
  using Error::Error;
};

// A leakage query was refused because it would exceed the per-part bit budget.
// The query is not executed and oracle state is unchanged.
struct BudgetError : Error {
  using Error::Error;
};

// The engine refused to run: enumeration space too large, or the restart cap
// was reached. Carries an optional size estimate for enumeration refusals.
struct RefusalError : Error {
  explicit RefusalError(const std::string& msg, unsigned long long size_estimate = 0)
      : Error(msg), size_estimate(size_estimate) {}
  unsigned long long size_estimate;
};

// A scripted oracle ran out of queued samples and has no fallback.
struct OracleExhaustedError : Error {
  using Error::Error;
};

// Malformed textual input, with 1-based line/column of the offending token.
struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : Error(msg + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
        line(line),
        column(column) {}
  std::size_t line;
  std::size_t column;
};

}  // namespace lrs
