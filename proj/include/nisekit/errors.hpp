#pragma once

#include <stdexcept>
#include <string>

namespace nisekit {

// Configuration / input-file problems. The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failures (NaN propagation, divergent integrands, failed
// decompositions). The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nisekit
