#pragma once

#include "eee/errors.hpp"

#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace eee {

/// Default 10GBase-T operation timings, in microseconds.
inline constexpr double kDefaultSleepUs = 2.88;
inline constexpr double kDefaultWakeupUs = 4.48;

/// BTR/EEE interface parameters. Times are in microseconds, power in watts.
///
/// An empty threshold never fires: `timer_threshold == nullopt` is the N policy,
/// `counter_threshold == nullopt` is the tau policy. At least one must be set.
struct ProtocolConfig {
    double sleep_duration = kDefaultSleepUs;
    double wakeup_duration = kDefaultWakeupUs;
    std::optional<double> timer_threshold;
    std::optional<long> counter_threshold;
    double power_high = 1.0;
    double power_low = 0.1;

    bool has_timer() const noexcept { return timer_threshold.has_value(); }
    bool has_counter() const noexcept { return counter_threshold.has_value(); }
    double overhead() const noexcept { return sleep_duration + wakeup_duration; }

    /// Throws ConfigError on the first violated invariant.
    ///
    /// A finite timer only has to be positive here; the analytic formulas stay
    /// well-defined below the Sleep duration. The simulator is stricter.
    void validate() const {
        if (!(sleep_duration > 0.0) || !std::isfinite(sleep_duration)) {
            throw ConfigError("sleep_duration must be positive");
        }
        if (!(wakeup_duration > 0.0) || !std::isfinite(wakeup_duration)) {
            throw ConfigError("wakeup_duration must be positive");
        }
        if (!(power_low >= 0.0) || !(power_high > power_low) || !std::isfinite(power_high)) {
            throw ConfigError("power levels must satisfy power_high > power_low >= 0");
        }
        if (!has_timer() && !has_counter()) {
            throw ConfigError("at least one of timer_threshold, counter_threshold must be finite");
        }
        if (has_timer() && (!(*timer_threshold > 0.0) || !std::isfinite(*timer_threshold))) {
            throw ConfigError("timer_threshold must be positive and finite when set");
        }
        if (has_counter() && *counter_threshold < 1) {
            throw ConfigError("counter_threshold must be >= 1 when set");
        }
    }

    bool operator==(const ProtocolConfig&) const = default;
};

enum class PolicyKind { TauAndN, TauOnly, NOnly, FTR };

inline PolicyKind policy_of(const ProtocolConfig& cfg) {
    if (cfg.has_counter() && *cfg.counter_threshold == 1) {
        return PolicyKind::FTR;
    }
    if (!cfg.has_counter()) {
        return PolicyKind::TauOnly;
    }
    if (!cfg.has_timer()) {
        return PolicyKind::NOnly;
    }
    return PolicyKind::TauAndN;
}

inline std::string_view to_string(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::TauAndN: return "tau_and_n";
    case PolicyKind::TauOnly: return "tau";
    case PolicyKind::NOnly: return "n";
    case PolicyKind::FTR: return "ftr";
    }
    return "?";
}

/// Service-time laws. Each exposes its first two raw moments.
struct DeterministicService {
    double value = 1.0;
    bool operator==(const DeterministicService&) const = default;
};

struct ExponentialService {
    double mean = 1.0;
    bool operator==(const ExponentialService&) const = default;
};

/// Discrete table of (service time, probability) pairs.
struct EmpiricalService {
    std::vector<double> values;
    std::vector<double> probabilities;
    bool operator==(const EmpiricalService&) const = default;
};

using ServiceLaw = std::variant<DeterministicService, ExponentialService, EmpiricalService>;

inline void validate(const ServiceLaw& law) {
    std::visit(
        [](const auto& l) {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, DeterministicService>) {
                if (!(l.value > 0.0) || !std::isfinite(l.value)) {
                    throw ConfigError("deterministic service time must be positive");
                }
            } else if constexpr (std::is_same_v<L, ExponentialService>) {
                if (!(l.mean > 0.0) || !std::isfinite(l.mean)) {
                    throw ConfigError("exponential service mean must be positive");
                }
            } else {
                if (l.values.empty() || l.values.size() != l.probabilities.size()) {
                    throw ConfigError("empirical service table needs matching, non-empty value/probability columns");
                }
                for (std::size_t i = 0; i < l.values.size(); ++i) {
                    if (!(l.values[i] > 0.0) || !std::isfinite(l.values[i])) {
                        throw ConfigError("empirical service times must be positive");
                    }
                    if (!(l.probabilities[i] >= 0.0)) {
                        throw ConfigError("empirical service probabilities must be non-negative");
                    }
                }
                const double total = std::accumulate(l.probabilities.begin(), l.probabilities.end(), 0.0);
                if (std::abs(total - 1.0) > 1e-9) {
                    throw ConfigError("empirical service probabilities must sum to 1");
                }
            }
        },
        law);
}

inline double service_mean(const ServiceLaw& law) {
    return std::visit(
        [](const auto& l) -> double {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, DeterministicService>) {
                return l.value;
            } else if constexpr (std::is_same_v<L, ExponentialService>) {
                return l.mean;
            } else {
                double m = 0.0;
                for (std::size_t i = 0; i < l.values.size(); ++i) {
                    m += l.values[i] * l.probabilities[i];
                }
                return m;
            }
        },
        law);
}

inline double service_second_moment(const ServiceLaw& law) {
    return std::visit(
        [](const auto& l) -> double {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, DeterministicService>) {
                return l.value * l.value;
            } else if constexpr (std::is_same_v<L, ExponentialService>) {
                return 2.0 * l.mean * l.mean;
            } else {
                double m2 = 0.0;
                for (std::size_t i = 0; i < l.values.size(); ++i) {
                    m2 += l.values[i] * l.values[i] * l.probabilities[i];
                }
                return m2;
            }
        },
        law);
}

/// Poisson arrivals (frames per microsecond) feeding a FIFO server.
struct TrafficModel {
    double arrival_rate = 0.2;
    ServiceLaw service = DeterministicService{1.0};

    double service_mean() const { return eee::service_mean(service); }
    double service_second_moment() const { return eee::service_second_moment(service); }
    double utilization() const { return arrival_rate * service_mean(); }

    /// Parameter checks only; stability is checked separately by require_stable().
    void validate() const {
        if (!(arrival_rate > 0.0) || !std::isfinite(arrival_rate)) {
            throw ConfigError("arrival_rate must be positive");
        }
        eee::validate(service);
    }

    void require_stable() const {
        validate();
        if (!(utilization() < 1.0)) {
            throw StabilityError(utilization());
        }
    }

    bool operator==(const TrafficModel&) const = default;
};

} // namespace eee
