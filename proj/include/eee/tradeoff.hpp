#pragma once

// Delay as a function of power efficiency when tau and N are coupled by
// (N - 1) / tau = lambda.

#include "eee/config.hpp"
#include "eee/errors.hpp"
#include "eee/performance.hpp"

#include <string>

namespace eee {

namespace detail {

inline double efficiency_fraction(const ProtocolConfig& cfg, const TrafficModel& traffic, double efficiency) {
    const double ceiling = efficiency_ceiling(cfg, traffic);
    if (!(efficiency >= 0.0)) {
        throw DomainError("efficiency must be non-negative");
    }
    if (!(efficiency < ceiling)) {
        throw DomainError("efficiency must stay below the ceiling " + std::to_string(ceiling) +
                          "; the delay diverges there");
    }
    return efficiency / ceiling;
}

} // namespace detail

/// Mean delay needed to reach `efficiency` (approximation built on the N-policy forms).
inline double delay_of_efficiency(const ProtocolConfig& cfg, const TrafficModel& traffic, double efficiency) {
    const double r = detail::efficiency_fraction(cfg, traffic, efficiency);
    const double ts = cfg.sleep_duration;
    const double tw = cfg.wakeup_duration;
    const double lambda = traffic.arrival_rate;
    return queueing_term(traffic) + (ts + tw) / (2.0 * (1.0 - r)) - (ts + tw * r) / (2.0 * lambda * (ts + tw)) +
           traffic.service_mean();
}

/// d delay_of_efficiency / d efficiency.
inline double delay_of_efficiency_derivative(const ProtocolConfig& cfg, const TrafficModel& traffic,
                                             double efficiency) {
    const double r = detail::efficiency_fraction(cfg, traffic, efficiency);
    const double ceiling = efficiency_ceiling(cfg, traffic);
    const double ts = cfg.sleep_duration;
    const double tw = cfg.wakeup_duration;
    const double lambda = traffic.arrival_rate;
    return (ts + tw) / (2.0 * ceiling * (1.0 - r) * (1.0 - r)) - tw / (2.0 * lambda * ceiling * (ts + tw));
}

} // namespace eee
