#pragma once

#include <stdexcept>
#include <string>

namespace fspde {

/// Configuration or input-contract violation; maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Runtime numerical failure (divergence, lost positivity, non-finite state);
/// maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// A fitted/measured quantity fell outside its declared tolerance;
/// maps to CLI exit code 4.
class ToleranceError : public std::runtime_error {
public:
  explicit ToleranceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fspde
