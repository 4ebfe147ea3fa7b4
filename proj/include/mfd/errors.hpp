// Error types shared by all modules.
#pragma once

#include <stdexcept>
#include <string>

namespace mfd {

/// Invalid configuration or precondition violation detectable before stepping.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical-health failure detected while stepping (instability, mass drift, ...).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mfd
