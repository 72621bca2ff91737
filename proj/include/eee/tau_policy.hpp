#pragma once

#include "eee/config.hpp"
#include "eee/count_distribution.hpp"
#include "eee/errors.hpp"
#include "eee/performance.hpp"

#include <algorithm>
#include <cmath>

namespace eee {

/// Vacation of the tau policy: exponential wait for the first arrival, then the
/// constant timer and Wakeup, d = tau + T_w.
///
/// The arrival count is 1 + Poisson(lambda d) because the first arrival *starts*
/// the constant part. That dependence breaks H(z) = V*(lambda - lambda z), and with
/// it the classical P-K formula fed with the true vacation moments.
class TauPolicyVacation {
public:
    TauPolicyVacation(double lambda, double tau, double wakeup) : lambda_(lambda), tau_(tau), wakeup_(wakeup) {
        if (!(lambda > 0.0) || !std::isfinite(lambda)) {
            throw DomainError("arrival rate must be positive");
        }
        if (!(tau >= 0.0) || !(wakeup >= 0.0)) {
            throw DomainError("tau and wakeup must be non-negative");
        }
    }

    double arrival_rate() const noexcept { return lambda_; }
    double constant_part() const noexcept { return tau_ + wakeup_; }

    double pdf(double x) const {
        const double d = constant_part();
        return x < d ? 0.0 : lambda_ * std::exp(-lambda_ * (x - d));
    }

    double cdf(double x) const {
        const double d = constant_part();
        return x < d ? 0.0 : -std::expm1(-lambda_ * (x - d));
    }

    /// V*(s) = lambda / (lambda + s) * exp(-s d).
    double laplace(double s) const { return lambda_ / (lambda_ + s) * std::exp(-s * constant_part()); }

    double mean() const { return 1.0 / lambda_ + constant_part(); }

    double second_moment() const {
        const double d = constant_part();
        return 2.0 / (lambda_ * lambda_) + 2.0 * d / lambda_ + d * d;
    }

    /// Density of the residual vacation for an independent-vacation model, (1 - F(x)) / E[V].
    double residual_density(double x) const { return x < 0.0 ? 0.0 : (1.0 - cdf(x)) / mean(); }

    /// h_n = Poisson(lambda d, n - 1).
    CountDistribution arrivals() const { return CountDistribution::poisson(lambda_ * constant_part(), 1); }

    /// H(z) = z exp(-lambda (1 - z) d).
    double pgf(double z) const { return z * std::exp(-lambda_ * (1.0 - z) * constant_part()); }

    /// |H(z) - V*(lambda - lambda z)|; zero would mean the vacation is arrival-independent.
    double pgf_mismatch(double z) const { return std::abs(pgf(z) - laplace(lambda_ - lambda_ * z)); }

    /// max over z = 0.1, 0.2, ..., 0.9 of pgf_mismatch.
    double max_pgf_mismatch() const {
        double worst = 0.0;
        for (int i = 1; i <= 9; ++i) {
            worst = std::max(worst, pgf_mismatch(0.1 * i));
        }
        return worst;
    }

    /// Classical P-K with this law's true first two moments (overestimates the delay).
    double classical_delay(const TrafficModel& traffic) const {
        return classical_pk_delay(traffic, mean(), second_moment());
    }

    /// Generalized P-K, from the arrival-count moments.
    double generalized_delay(const TrafficModel& traffic) const {
        return mean_delay_tau_policy(traffic, tau_, wakeup_);
    }

private:
    double lambda_;
    double tau_;
    double wakeup_;
};

inline TauPolicyVacation tau_policy_vacation_law(double lambda, double tau, double wakeup) {
    return TauPolicyVacation(lambda, tau, wakeup);
}

} // namespace eee
