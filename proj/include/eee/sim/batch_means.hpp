#pragma once

#include "eee/errors.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

namespace eee::sim {

/// Point estimate with the half-width of its 95% confidence interval.
struct Estimate {
    double value = 0.0;
    double half_width = 0.0;

    double lower() const noexcept { return value - half_width; }
    double upper() const noexcept { return value + half_width; }
    bool contains(double x) const noexcept { return x >= lower() && x <= upper(); }

    bool operator==(const Estimate&) const = default;
};

/// Two-sided Student-t quantile t_{1 - alpha/2, dof}.
inline double student_t_quantile(double confidence, std::size_t dof) {
    boost::math::students_t dist(static_cast<double>(dof));
    return boost::math::quantile(boost::math::complement(dist, (1.0 - confidence) / 2.0));
}

/// Batch-means estimator of a ratio sum(num) / sum(den). Each batch contributes
/// one ratio; the interval comes from their spread.
class RatioBatches {
public:
    void add_batch(double numerator, double denominator) {
        numerators_.push_back(numerator);
        denominators_.push_back(denominator);
    }

    std::size_t size() const noexcept { return numerators_.size(); }

    Estimate estimate(double confidence = 0.95) const {
        const std::size_t b = size();
        if (b < 2) {
            throw StatisticalError("batch means need at least two batches");
        }
        double num = 0.0;
        double den = 0.0;
        double mean_ratio = 0.0;
        for (std::size_t i = 0; i < b; ++i) {
            num += numerators_[i];
            den += denominators_[i];
            mean_ratio += numerators_[i] / denominators_[i];
        }
        mean_ratio /= static_cast<double>(b);
        double ss = 0.0;
        for (std::size_t i = 0; i < b; ++i) {
            const double d = numerators_[i] / denominators_[i] - mean_ratio;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(b - 1));
        return {num / den, student_t_quantile(confidence, b - 1) * sd / std::sqrt(static_cast<double>(b))};
    }

private:
    std::vector<double> numerators_;
    std::vector<double> denominators_;
};

} // namespace eee::sim
