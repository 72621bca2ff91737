#pragma once

// Arrival-count distributions over one vacation (Sleep + LPI + Wakeup) and the
// mean vacation length they imply.

#include "eee/config.hpp"
#include "eee/count_distribution.hpp"
#include "eee/errors.hpp"
#include "eee/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace eee {

namespace detail {

inline void require_rate(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw DomainError("arrival rate must be positive and finite");
    }
}

/// sum_{k=0}^{last} Poisson(mean, k) * f(k), stopping once the terms underflow past the mode.
template <class F>
double poisson_weighted_sum(double mean, long last, F&& f) {
    double sum = 0.0;
    for (long k = 0; k <= last; ++k) {
        const double p = poisson_pmf(k, mean);
        if (p == 0.0 && static_cast<double>(k) > mean) {
            break;
        }
        sum += p * f(k);
    }
    return sum;
}

} // namespace detail

/// a_n: arrivals during Sleep + LPI. a_0 = 0 always.
inline CountDistribution sleep_lpi_arrival_dist(const ProtocolConfig& cfg, double lambda) {
    cfg.validate();
    detail::require_rate(lambda);
    const double during_sleep = lambda * cfg.sleep_duration;

    if (!cfg.has_counter()) {
        // First arrival arms the timer; everything in the next tau joins it.
        return CountDistribution::with_tail({0.0}, {PoissonComponent{1.0, lambda * *cfg.timer_threshold, 1}});
    }

    const long n_max = *cfg.counter_threshold;
    std::vector<double> head(static_cast<std::size_t>(n_max) + 1, 0.0);
    double timer_mass = 0.0;
    if (cfg.has_timer()) {
        const double during_timer = lambda * *cfg.timer_threshold;
        for (long n = 1; n <= n_max - 1; ++n) {
            head[static_cast<std::size_t>(n)] = poisson_pmf(n - 1, during_timer);
        }
        // Complement of the timer-terminated cases, P{Poisson(lambda tau) >= N-1}.
        timer_mass = poisson_sf(n_max - 1, during_timer);
    } else {
        timer_mass = 1.0;
    }
    double at_counter = timer_mass - poisson_sf(n_max + 1, during_sleep);
    if (at_counter < 0.0) {
        if (at_counter < -CountDistribution::kNegativeTolerance) {
            throw ConsistencyError("a_N evaluated negative (" + std::to_string(at_counter) + ")");
        }
        at_counter = 0.0;
    }
    head[static_cast<std::size_t>(n_max)] = at_counter;
    return CountDistribution::with_tail(std::move(head), {PoissonComponent{1.0, during_sleep, 0}});
}

/// b_n: arrivals during the fixed Wakeup period.
inline CountDistribution wakeup_arrival_dist(const ProtocolConfig& cfg, double lambda) {
    cfg.validate();
    detail::require_rate(lambda);
    return CountDistribution::poisson(lambda * cfg.wakeup_duration);
}

/// h_n = sum_k a_{n-k} b_k: frames waiting when the vacation ends.
inline CountDistribution vacation_arrival_dist(const ProtocolConfig& cfg, double lambda) {
    return convolve(sleep_lpi_arrival_dist(cfg, lambda), wakeup_arrival_dist(cfg, lambda));
}

/// H'(1) from the closed-form sums (no convolution).
inline double mean_arrivals_closed_form(const ProtocolConfig& cfg, double lambda) {
    cfg.validate();
    detail::require_rate(lambda);
    if (!cfg.has_counter()) {
        return 1.0 + lambda * (*cfg.timer_threshold + cfg.wakeup_duration);
    }
    const long n_max = *cfg.counter_threshold;
    const auto nd = static_cast<double>(n_max);
    double h1 = lambda * cfg.overhead();
    h1 += detail::poisson_weighted_sum(lambda * cfg.sleep_duration, n_max - 1,
                                       [nd](long k) { return nd - static_cast<double>(k); });
    if (cfg.has_timer()) {
        h1 -= detail::poisson_weighted_sum(lambda * *cfg.timer_threshold, n_max - 2,
                                           [nd](long k) { return nd - static_cast<double>(k) - 1.0; });
    }
    return h1;
}

/// Mean vacation of the tau policy: first-arrival wait + timer + Wakeup.
inline double mean_vacation_tau_policy(double lambda, double tau, double wakeup) {
    detail::require_rate(lambda);
    return 1.0 / lambda + tau + wakeup;
}

/// Exact mean vacation of the N policy (timer never fires).
inline double mean_vacation_n_policy(const ProtocolConfig& cfg, double lambda) {
    ProtocolConfig n_only = cfg;
    n_only.timer_threshold.reset();
    return mean_arrivals_closed_form(n_only, lambda) / lambda;
}

/// N/lambda + T_w: ignores >= N-1 arrivals during Sleep. Approximation.
inline double mean_vacation_n_policy_approx(long counter, double lambda, double wakeup) {
    detail::require_rate(lambda);
    return static_cast<double>(counter) / lambda + wakeup;
}

/// Exact mean vacation V = H'(1) / lambda, with the limiting closed forms per policy.
inline double mean_vacation(const ProtocolConfig& cfg, double lambda) {
    cfg.validate();
    switch (policy_of(cfg)) {
    case PolicyKind::TauOnly:
        return mean_vacation_tau_policy(lambda, *cfg.timer_threshold, cfg.wakeup_duration);
    case PolicyKind::NOnly:
        return mean_vacation_n_policy(cfg, lambda);
    case PolicyKind::TauAndN:
    case PolicyKind::FTR:
        break;
    }
    return mean_arrivals_closed_form(cfg, lambda) / lambda;
}

/// min{1/lambda + tau, N/lambda} + T_w. Approximation; an unset threshold drops its branch.
inline double mean_vacation_approx(const ProtocolConfig& cfg, double lambda) {
    cfg.validate();
    detail::require_rate(lambda);
    double lpi = std::numeric_limits<double>::infinity();
    if (cfg.has_timer()) {
        lpi = 1.0 / lambda + *cfg.timer_threshold;
    }
    if (cfg.has_counter()) {
        lpi = std::min(lpi, static_cast<double>(*cfg.counter_threshold) / lambda);
    }
    return lpi + cfg.wakeup_duration;
}

struct FactorialMoments {
    double first = 0.0;  // H'(1)
    double second = 0.0; // H''(1)
};

inline FactorialMoments factorial_moments(const CountDistribution& h) {
    return {h.first_factorial_moment(), h.second_factorial_moment()};
}

/// H'(1), H''(1) of the FTR scheme (N = 1).
inline FactorialMoments ftr_h_moments(double lambda, const ProtocolConfig& cfg) {
    detail::require_rate(lambda);
    const double overhead = lambda * cfg.overhead();
    const double no_sleep_arrival = std::exp(-lambda * cfg.sleep_duration);
    return {overhead + no_sleep_arrival,
            overhead * overhead + 2.0 * lambda * cfg.wakeup_duration * no_sleep_arrival};
}

} // namespace eee
