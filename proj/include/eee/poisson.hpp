#pragma once

#include "eee/errors.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

namespace eee {

/// log P{Poisson(mean) = k}; -inf for impossible outcomes.
inline double poisson_log_pmf(std::int64_t k, double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw DomainError("poisson mean must be finite and non-negative");
    }
    if (k < 0) {
        return -std::numeric_limits<double>::infinity();
    }
    if (mean == 0.0) {
        return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    const auto kd = static_cast<double>(k);
    return -mean + kd * std::log(mean) - std::lgamma(kd + 1.0);
}

/// P{Poisson(mean) = k}, evaluated in log space. Negative k has zero mass.
inline double poisson_pmf(std::int64_t k, double mean) {
    return std::exp(poisson_log_pmf(k, mean));
}

/// P{Poisson(mean) >= k}. Summed from the short side so both tails keep relative accuracy.
inline double poisson_sf(std::int64_t k, double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw DomainError("poisson mean must be finite and non-negative");
    }
    if (k <= 0) {
        return 1.0;
    }
    if (mean == 0.0) {
        return 0.0;
    }
    if (static_cast<double>(k) <= mean) {
        double cdf = 0.0;
        for (std::int64_t j = 0; j < k; ++j) {
            cdf += poisson_pmf(j, mean);
        }
        return cdf >= 1.0 ? 0.0 : 1.0 - cdf;
    }
    // Upper tail: terms decrease monotonically past the mode.
    double sum = 0.0;
    for (std::int64_t j = k;; ++j) {
        const double term = poisson_pmf(j, mean);
        sum += term;
        if (term <= sum * 1e-18 || term == 0.0) {
            break;
        }
    }
    return sum;
}

/// P{Poisson(mean) < k}.
inline double poisson_cdf_below(std::int64_t k, double mean) {
    if (k <= 0) {
        return 0.0;
    }
    if (static_cast<double>(k) <= mean) {
        double cdf = 0.0;
        for (std::int64_t j = 0; j < k; ++j) {
            cdf += poisson_pmf(j, mean);
        }
        return cdf;
    }
    return 1.0 - poisson_sf(k, mean);
}

} // namespace eee
