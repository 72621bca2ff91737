#pragma once

#include <stdexcept>
#include <string>

namespace eee {

/// Invalid parameter values (bad thresholds, negative rates, malformed service tables).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Offered load rho = lambda * E[X] is not below one.
class StabilityError : public std::domain_error {
public:
    explicit StabilityError(double rho)
        : std::domain_error("unstable queue: rho = " + std::to_string(rho) + " >= 1"), rho_(rho) {}
    double rho() const noexcept { return rho_; }

private:
    double rho_;
};

/// A computed quantity broke an invariant that valid inputs guarantee.
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Simulation too short for the requested statistics.
class StatisticalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace eee
