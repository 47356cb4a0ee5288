#pragma once

#include <stdexcept>
#include <string>

namespace mixvar {

/// Malformed input file: missing columns, bad header, unparseable cells.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

/// Well-formed input with invalid content (non-positive price, duplicate
/// date, degenerate sample). Messages carry row context where available.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Model estimation failure: degenerate likelihood, component collapse,
/// initialization that cannot produce a usable starting point.
class FitError : public std::runtime_error {
 public:
  explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mixvar
