#pragma once

#include <stdexcept>
#include <string>

namespace cmet {

// Discrete curve fails the immersion requirement (zero-length edge or
// vanishing central-difference speed).
struct ImmersionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration: metric orders, coefficients, schema violations.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// SPD factorization or solve failure (coincident points, residual blow-up).
struct SpdError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a function.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

}  // namespace cmet
