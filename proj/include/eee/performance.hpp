#pragma once

// Power efficiency and mean frame delay (sojourn time) of the BTR interface.

#include "eee/config.hpp"
#include "eee/count_distribution.hpp"
#include "eee/errors.hpp"
#include "eee/poisson.hpp"
#include "eee/vacation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eee {

// ---- power -----------------------------------------------------------------

/// eta* = (1 - rho)(phi_h - phi_l) / phi_h, reached as the mean vacation grows without bound.
inline double efficiency_ceiling(const ProtocolConfig& cfg, const TrafficModel& traffic) {
    traffic.require_stable();
    return (1.0 - traffic.utilization()) * (cfg.power_high - cfg.power_low) / cfg.power_high;
}

/// eta for a given mean vacation length.
inline double efficiency_for_vacation(double mean_vacation, const ProtocolConfig& cfg, const TrafficModel& traffic) {
    constexpr double kSlack = 1e-12;
    if (mean_vacation < cfg.overhead() * (1.0 - kSlack)) {
        throw ConsistencyError("mean vacation shorter than Sleep + Wakeup");
    }
    return std::max(0.0, 1.0 - cfg.overhead() / mean_vacation) * efficiency_ceiling(cfg, traffic);
}

namespace detail {

// A timer shorter than Sleep pushes the arrival-count law outside its derivation; the
// extrapolated mean vacation can then fall below T_s + T_w, which is read as no saving.
inline double efficiency_checked(double v, const ProtocolConfig& cfg, const TrafficModel& traffic) {
    if (cfg.has_timer() && *cfg.timer_threshold < cfg.sleep_duration) {
        return std::max(0.0, 1.0 - cfg.overhead() / v) * efficiency_ceiling(cfg, traffic);
    }
    return efficiency_for_vacation(v, cfg, traffic);
}

} // namespace detail

inline double power_efficiency(const ProtocolConfig& cfg, const TrafficModel& traffic) {
    return detail::efficiency_checked(mean_vacation(cfg, traffic.arrival_rate), cfg, traffic);
}

inline double power_efficiency_tau_policy(const ProtocolConfig& cfg, const TrafficModel& traffic) {
    if (!cfg.has_timer()) {
        throw ConfigError("tau-policy efficiency needs a timer threshold");
    }
    const double v = mean_vacation_tau_policy(traffic.arrival_rate, *cfg.timer_threshold, cfg.wakeup_duration);
    return detail::efficiency_checked(v, cfg, traffic);
}

inline double power_efficiency_n_policy(const ProtocolConfig& cfg, const TrafficModel& traffic) {
    if (!cfg.has_counter()) {
        throw ConfigError("N-policy efficiency needs a counter threshold");
    }
    return efficiency_for_vacation(mean_vacation_n_policy(cfg, traffic.arrival_rate), cfg, traffic);
}

/// Approximation: vacation taken as N/lambda + T_w.
inline double power_efficiency_n_policy_approx(const ProtocolConfig& cfg, const TrafficModel& traffic) {
    if (!cfg.has_counter()) {
        throw ConfigError("N-policy efficiency needs a counter threshold");
    }
    const double v =
        mean_vacation_n_policy_approx(*cfg.counter_threshold, traffic.arrival_rate, cfg.wakeup_duration);
    // N/lambda + T_w may undercut T_s + T_w at heavy load; the approximation then saves nothing.
    return std::max(0.0, 1.0 - cfg.overhead() / v) * efficiency_ceiling(cfg, traffic);
}

/// Approximation: min of the tau-policy and N-policy(approx) efficiencies.
inline double power_efficiency_approx(const ProtocolConfig& cfg, const TrafficModel& traffic) {
    const double v = mean_vacation_approx(cfg, traffic.arrival_rate);
    return std::max(0.0, 1.0 - cfg.overhead() / v) * efficiency_ceiling(cfg, traffic);
}

/// Mean cycle length, vacation plus busy period.
inline double mean_cycle(const ProtocolConfig& cfg, const TrafficModel& traffic) {
    traffic.require_stable();
    return mean_vacation(cfg, traffic.arrival_rate) / (1.0 - traffic.utilization());
}

inline double mean_busy_period(const ProtocolConfig& cfg, const TrafficModel& traffic) {
    return mean_cycle(cfg, traffic) - mean_vacation(cfg, traffic.arrival_rate);
}

/// Time-averaged power draw, phi_l during LPI and phi_h everywhere else.
inline double mean_power(const ProtocolConfig& cfg, const TrafficModel& traffic) {
    const double v = mean_vacation(cfg, traffic.arrival_rate);
    const double c = mean_cycle(cfg, traffic);
    const double lpi = v - cfg.overhead();
    return (lpi * cfg.power_low + (c - lpi) * cfg.power_high) / c;
}

// ---- delay -----------------------------------------------------------------

/// lambda E[X^2] / (2 (1 - rho)): residual service seen by arrivals, inflated by the load.
inline double queueing_term(const TrafficModel& traffic) {
    traffic.require_stable();
    return traffic.arrival_rate * traffic.service_second_moment() / (2.0 * (1.0 - traffic.utilization()));
}

/// Generalized P-K: D = lambda E[X^2]/(2(1-rho)) + H''(1)/(2 lambda H'(1)) + E[X].
inline double mean_delay_from_moments(const TrafficModel& traffic, const FactorialMoments& h) {
    if (!(h.first > 0.0)) {
        throw DomainError("H'(1) must be positive");
    }
    return queueing_term(traffic) + h.second / (2.0 * traffic.arrival_rate * h.first) + traffic.service_mean();
}

/// Mean delay from the moments of the convolved vacation arrival distribution.
inline double mean_delay(const ProtocolConfig& cfg, const TrafficModel& traffic) {
    traffic.require_stable();
    return mean_delay_from_moments(traffic, factorial_moments(vacation_arrival_dist(cfg, traffic.arrival_rate)));
}

/// Exact tau-policy delay.
inline double mean_delay_tau_policy(const TrafficModel& traffic, double tau, double wakeup) {
    const double lambda = traffic.arrival_rate;
    const double x = lambda * (tau + wakeup);
    return queueing_term(traffic) + (x * x + 2.0 * x) / (2.0 * lambda * (1.0 + x)) + traffic.service_mean();
}

namespace detail {

/// Numerator/denominator pair of the vacation term A / (2 lambda B) in the closed-form delay.
struct DelayTerms {
    double numerator = 0.0;   // A = H''(1)
    double denominator = 0.0; // B = H'(1)
};

inline DelayTerms closed_form_delay_terms(const ProtocolConfig& cfg, double lambda) {
    const long n_max = *cfg.counter_threshold;
    const auto nd = static_cast<double>(n_max);
    const double tw = lambda * cfg.wakeup_duration;
    const double ts = lambda * cfg.sleep_duration;

    DelayTerms t;
    t.numerator = (tw + ts) * (tw + ts);
    t.denominator = tw + ts;
    t.numerator += poisson_weighted_sum(ts, n_max - 1, [&](long k) {
        const auto kd = static_cast<double>(k);
        return 2.0 * tw * (nd - kd) + nd * (nd - 1.0) - kd * (kd - 1.0);
    });
    t.denominator += poisson_weighted_sum(ts, n_max - 1, [&](long k) { return nd - static_cast<double>(k); });
    if (cfg.has_timer()) {
        const double lt = lambda * *cfg.timer_threshold;
        t.numerator -= poisson_weighted_sum(lt, n_max - 2, [&](long k) {
            const auto kd = static_cast<double>(k);
            return 2.0 * tw * (nd - kd - 1.0) + nd * (nd - 1.0) - kd * (kd + 1.0);
        });
        t.denominator -= poisson_weighted_sum(lt, n_max - 2, [&](long k) { return nd - static_cast<double>(k) - 1.0; });
    }
    return t;
}

} // namespace detail

/// Exact N-policy delay (timer never fires).
inline double mean_delay_n_policy(const ProtocolConfig& cfg, const TrafficModel& traffic) {
    if (!cfg.has_counter()) {
        throw ConfigError("N-policy delay needs a counter threshold");
    }
    traffic.require_stable();
    ProtocolConfig n_only = cfg;
    n_only.timer_threshold.reset();
    const auto t = detail::closed_form_delay_terms(n_only, traffic.arrival_rate);
    return mean_delay_from_moments(traffic, {t.denominator, t.numerator});
}

/// N-policy delay ignoring >= N-1 arrivals during Sleep. Approximation.
inline double mean_delay_n_policy_approx(long counter, const TrafficModel& traffic, double wakeup) {
    const double lambda = traffic.arrival_rate;
    const auto n = static_cast<double>(counter);
    const double m = n + lambda * wakeup;
    return queueing_term(traffic) + (m * m - n) / (2.0 * lambda * m) + traffic.service_mean();
}

/// Closed-form delay for the configured policy: the A/B sums for tau&N (and FTR),
/// and the corresponding limiting forms for the tau and N policies.
inline double mean_delay_closed_form(const ProtocolConfig& cfg, const TrafficModel& traffic) {
    cfg.validate();
    traffic.require_stable();
    switch (policy_of(cfg)) {
    case PolicyKind::TauOnly:
        return mean_delay_tau_policy(traffic, *cfg.timer_threshold, cfg.wakeup_duration);
    case PolicyKind::NOnly:
        return mean_delay_n_policy(cfg, traffic);
    case PolicyKind::TauAndN:
    case PolicyKind::FTR:
        break;
    }
    const auto t = detail::closed_form_delay_terms(cfg, traffic.arrival_rate);
    return mean_delay_from_moments(traffic, {t.denominator, t.numerator});
}

/// min{D_tau, D_N(approx)} vacation terms. Approximation; an unset threshold drops its branch.
inline double mean_delay_approx(const ProtocolConfig& cfg, const TrafficModel& traffic) {
    cfg.validate();
    const double base = queueing_term(traffic) + traffic.service_mean();
    double best = std::numeric_limits<double>::infinity();
    if (cfg.has_timer()) {
        best = mean_delay_tau_policy(traffic, *cfg.timer_threshold, cfg.wakeup_duration) - base;
    }
    if (cfg.has_counter()) {
        best = std::min(best, mean_delay_n_policy_approx(*cfg.counter_threshold, traffic, cfg.wakeup_duration) - base);
    }
    return best + base;
}

/// Classical M/G/1-with-vacations P-K formula. Only valid when vacations are
/// independent of the arrival process.
inline double classical_pk_delay(double lambda, double service_mean, double service_second_moment,
                                 double vacation_mean, double vacation_second_moment) {
    if (!(lambda > 0.0) || !(service_mean > 0.0)) {
        throw DomainError("arrival rate and service mean must be positive");
    }
    const double rho = lambda * service_mean;
    if (!(rho < 1.0)) {
        throw StabilityError(rho);
    }
    if (!(vacation_mean > 0.0)) {
        throw DomainError("vacation mean must be positive");
    }
    return lambda * service_second_moment / (2.0 * (1.0 - rho)) + vacation_second_moment / (2.0 * vacation_mean) +
           service_mean;
}

inline double classical_pk_delay(const TrafficModel& traffic, double vacation_mean, double vacation_second_moment) {
    return classical_pk_delay(traffic.arrival_rate, traffic.service_mean(), traffic.service_second_moment(),
                              vacation_mean, vacation_second_moment);
}

} // namespace eee
