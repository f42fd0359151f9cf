#pragma once

#include <stdexcept>
#include <string>

namespace webparf {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Contract violations on the frontier / allocator surface.
struct DuplicateDomainError : Error {
  explicit DuplicateDomainError(const std::string& name)
      : Error("duplicate domain: " + name) {}
};

struct UnknownDomainError : Error {
  explicit UnknownDomainError(const std::string& name)
      : Error("unknown domain: " + name) {}
};

struct UnknownUrlError : Error {
  explicit UnknownUrlError(const std::string& url)
      : Error("unknown url: " + url) {}
};

struct NoSurvivorsError : Error {
  NoSurvivorsError() : Error("no live workers remain to absorb the load") {}
};

struct InvalidParamsError : Error {
  using Error::Error;
};

// Configuration loading. ParseError carries field/position diagnostics in
// its message; InvariantViolation means the file parsed but the values are
// unusable.
struct ConfigError : Error {
  using Error::Error;
};

struct ParseError : ConfigError {
  using ConfigError::ConfigError;
};

struct InvariantViolation : ConfigError {
  using ConfigError::ConfigError;
};

}  // namespace webparf
