#pragma once

// Parameter selection: couple the timer to the counter through (N - 1) / tau = lambda,
// then size N from a mean-delay requirement.

#include "eee/config.hpp"
#include "eee/errors.hpp"
#include "eee/performance.hpp"
#include "eee/tradeoff.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eee::plan {

inline constexpr long kMaxCounter = 1'000'000;

/// tau = (N - 1) / lambda. N = 1 is the FTR scheme: no timer, so nullopt.
inline std::optional<double> tau_for(long counter, double lambda) {
    if (counter < 1) {
        throw DomainError("counter threshold must be >= 1");
    }
    if (!(lambda > 0.0)) {
        throw DomainError("arrival rate must be positive");
    }
    if (counter == 1) {
        return std::nullopt;
    }
    return static_cast<double>(counter - 1) / lambda;
}

/// `base` with thresholds replaced by the coupled pair for `counter`.
inline ProtocolConfig coupled_config(const ProtocolConfig& base, long counter, double lambda) {
    ProtocolConfig cfg = base;
    cfg.counter_threshold = counter;
    cfg.timer_threshold = tau_for(counter, lambda);
    return cfg;
}

inline double coupled_delay(const ProtocolConfig& base, const TrafficModel& traffic, long counter) {
    return mean_delay_closed_form(coupled_config(base, counter, traffic.arrival_rate), traffic);
}

/// Mean delay of the FTR scheme; no (N, tau) choice can do better.
inline double ftr_delay(const ProtocolConfig& base, const TrafficModel& traffic) {
    return coupled_delay(base, traffic, 1);
}

struct DelayBudget {
    enum class Kind { Absolute, RelativeToFtr };
    Kind kind = Kind::RelativeToFtr;
    double value = 1.0;

    static DelayBudget absolute(double microseconds) { return {Kind::Absolute, microseconds}; }
    static DelayBudget relative(double multiplier) { return {Kind::RelativeToFtr, multiplier}; }

    double resolve(double ftr) const { return kind == Kind::Absolute ? value : value * ftr; }
};

enum class Objective {
    /// N whose predicted delay is closest to the requirement (solve D(N) = D_req, round).
    NearestDelay,
    /// Largest N whose predicted delay does not exceed the requirement.
    WithinBudget,
};

struct PlanRequest {
    TrafficModel traffic;
    DelayBudget budget;
    ProtocolConfig protocol_base; // thresholds ignored
    Objective objective = Objective::NearestDelay;
};

struct PlanResult {
    long counter_threshold = 1;
    std::optional<double> timer_threshold; // empty for FTR
    double budget_us = 0.0;
    double predicted_delay_exact = 0.0;
    double predicted_delay_rule = 0.0; // N-policy approximation
    double predicted_efficiency = 0.0;
    double efficiency_ceiling = 0.0;
    double ftr_delay = 0.0;
    double ftr_efficiency = 0.0;

    bool is_ftr() const noexcept { return counter_threshold == 1; }
};

/// The requirement lies below the FTR delay floor, or beyond the N search bound.
class InfeasiblePlan : public std::runtime_error {
public:
    InfeasiblePlan(const std::string& what, double floor_us) : std::runtime_error(what), floor_(floor_us) {}
    double floor_us() const noexcept { return floor_; }

private:
    double floor_;
};

namespace detail {

/// Smallest N in [1, kMaxCounter] with delay(N) >= budget; kMaxCounter + 1 if none.
/// Relies on delay(N) increasing in N.
template <class DelayFn>
long first_reaching(DelayFn&& delay, double budget) {
    if (delay(1) >= budget) {
        return 1;
    }
    long lo = 1; // delay(lo) < budget
    long hi = 2;
    while (delay(hi) < budget) {
        lo = hi;
        if (hi == kMaxCounter) {
            return kMaxCounter + 1;
        }
        hi = std::min(2 * hi, kMaxCounter);
    }
    while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        (delay(mid) < budget ? lo : hi) = mid;
    }
    return hi;
}

} // namespace detail

inline PlanResult evaluate(const ProtocolConfig& base, const TrafficModel& traffic, long counter) {
    const double lambda = traffic.arrival_rate;
    const ProtocolConfig cfg = coupled_config(base, counter, lambda);
    const ProtocolConfig ftr = coupled_config(base, 1, lambda);
    PlanResult r;
    r.counter_threshold = counter;
    r.timer_threshold = cfg.timer_threshold;
    r.predicted_delay_exact = mean_delay_closed_form(cfg, traffic);
    r.predicted_delay_rule = mean_delay_n_policy_approx(counter, traffic, cfg.wakeup_duration);
    r.predicted_efficiency = power_efficiency(cfg, traffic);
    r.efficiency_ceiling = efficiency_ceiling(cfg, traffic);
    r.ftr_delay = mean_delay_closed_form(ftr, traffic);
    r.ftr_efficiency = power_efficiency(ftr, traffic);
    return r;
}

inline PlanResult plan(const PlanRequest& req) {
    req.traffic.require_stable();
    ProtocolConfig base = req.protocol_base;
    base.counter_threshold = 1;
    base.timer_threshold.reset();
    base.validate();

    const double floor = ftr_delay(base, req.traffic);
    const double budget = req.budget.resolve(floor);
    if (!(budget >= floor)) {
        throw InfeasiblePlan("delay requirement " + std::to_string(budget) + " us is below the FTR floor " +
                                 std::to_string(floor) + " us",
                             floor);
    }
    auto delay = [&](long n) { return coupled_delay(base, req.traffic, n); };
    const long reach = detail::first_reaching(delay, budget);
    if (reach > kMaxCounter) {
        throw InfeasiblePlan("delay requirement needs N beyond " + std::to_string(kMaxCounter), floor);
    }

    long chosen = reach;
    const double at_reach = delay(reach);
    if (req.objective == Objective::WithinBudget) {
        if (at_reach > budget) {
            chosen = reach - 1; // reach >= 2 here since delay(1) = floor <= budget
        }
    } else if (reach > 1 && budget - delay(reach - 1) <= at_reach - budget) {
        chosen = reach - 1;
    }
    PlanResult r = evaluate(base, req.traffic, chosen);
    r.budget_us = budget;
    return r;
}

struct TradeoffRow {
    long counter = 1;
    std::optional<double> tau;
    double delay = 0.0;       // exact
    double efficiency = 0.0;  // exact
    double delay_rule = 0.0;  // N-policy approximation
    double delay_curve = 0.0; // delay-of-efficiency curve at this row's efficiency
};

/// One row per N in [first, last], tau coupled to N.
inline std::vector<TradeoffRow> tradeoff_sweep(const TrafficModel& traffic, const ProtocolConfig& base, long first,
                                               long last) {
    traffic.require_stable();
    if (first < 1 || last < first) {
        throw DomainError("N range must satisfy 1 <= first <= last");
    }
    std::vector<TradeoffRow> rows;
    rows.reserve(static_cast<std::size_t>(last - first + 1));
    for (long n = first; n <= last; ++n) {
        const ProtocolConfig cfg = coupled_config(base, n, traffic.arrival_rate);
        TradeoffRow row;
        row.counter = n;
        row.tau = cfg.timer_threshold;
        row.delay = mean_delay_closed_form(cfg, traffic);
        row.efficiency = power_efficiency(cfg, traffic);
        row.delay_rule = mean_delay_n_policy_approx(n, traffic, cfg.wakeup_duration);
        row.delay_curve = delay_of_efficiency(cfg, traffic, row.efficiency);
        rows.push_back(row);
    }
    return rows;
}

/// Published parameter-selection table: BTR rows relative to the FTR baseline at the same rate.
struct Table1Row {
    double lambda;
    long counter;
    double tau;
    double delay_multiplier;
    double efficiency_multiplier;
};

inline constexpr std::array<Table1Row, 15> kTable1{{
    {1.0 / 5.0, 2, 5.0, 1.23, 1.53},
    {1.0 / 5.0, 4, 15.0, 2.03, 2.36},
    {1.0 / 5.0, 11, 50.0, 5.20, 3.12},
    {1.0 / 5.0, 21, 100.0, 9.91, 3.35},
    {1.0 / 5.0, 41, 200.0, 19.49, 3.48},
    {1.0 / 3.0, 2, 3.0, 1.09, 1.76},
    {1.0 / 3.0, 6, 15.0, 2.05, 4.66},
    {1.0 / 3.0, 17, 48.0, 5.09, 6.33},
    {1.0 / 3.0, 35, 102.0, 10.23, 6.88},
    {1.0 / 3.0, 69, 204.0, 20.06, 7.14},
    {3.0 / 5.0, 2, 1.67, 1.01, 1.62},
    {3.0 / 5.0, 10, 15.0, 1.99, 15.96},
    {3.0 / 5.0, 31, 50.0, 5.04, 22.27},
    {3.0 / 5.0, 65, 105.0, 9.92, 24.13},
    {3.0 / 5.0, 133, 220.0, 20.23, 25.03},
}};

struct Table1Check {
    Table1Row printed;
    double ftr_delay = 0.0;
    double ftr_efficiency = 0.0;
    double delay = 0.0;
    double efficiency = 0.0;
    double delay_multiplier = 0.0;
    double efficiency_multiplier = 0.0;
    long planned_counter = 0;

    double delay_relative_error() const { return delay_multiplier / printed.delay_multiplier - 1.0; }
    double efficiency_relative_error() const {
        return efficiency_multiplier / printed.efficiency_multiplier - 1.0;
    }
};

/// Evaluates every row at its printed (lambda, N, tau) and re-plans N from its printed delay multiplier.
inline std::vector<Table1Check> reproduce_table1(const ProtocolConfig& base, const ServiceLaw& service) {
    std::vector<Table1Check> out;
    for (const auto& row : kTable1) {
        const TrafficModel traffic{row.lambda, service};
        ProtocolConfig cfg = base;
        cfg.counter_threshold = row.counter;
        cfg.timer_threshold = row.tau;
        Table1Check c;
        c.printed = row;
        c.ftr_delay = ftr_delay(base, traffic);
        c.ftr_efficiency = power_efficiency(coupled_config(base, 1, row.lambda), traffic);
        c.delay = mean_delay_closed_form(cfg, traffic);
        c.efficiency = power_efficiency(cfg, traffic);
        c.delay_multiplier = c.delay / c.ftr_delay;
        c.efficiency_multiplier = c.efficiency / c.ftr_efficiency;
        c.planned_counter = plan({traffic, DelayBudget::relative(row.delay_multiplier), base}).counter_threshold;
        out.push_back(c);
    }
    return out;
}

} // namespace eee::plan
