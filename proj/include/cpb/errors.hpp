#pragma once

#include <stdexcept>
#include <string>

namespace cpb {

// Malformed or missing columns, unknown covariate names.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

// Non-numeric cells, NaN/inf values at ingestion.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// A treatment arm is empty where both are required.
class PositivityError : public std::runtime_error {
 public:
  explicit PositivityError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure (singular design, propensity outside (0,1), ...).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cpb
