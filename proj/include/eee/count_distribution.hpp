#pragma once

#include "eee/errors.hpp"
#include "eee/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace eee {

/// `weight * P{Poisson(mean) = n - shift}` for every n >= 0. Weights may be negative
/// inside a mixture as long as the mixture itself stays non-negative.
struct PoissonComponent {
    double weight = 1.0;
    double mean = 0.0;
    long shift = 0;

    double at(long n) const { return weight == 0.0 ? 0.0 : weight * poisson_pmf(n - shift, mean); }
    double mass_from(long n) const { return weight * poisson_sf(n - shift, mean); }

    bool operator==(const PoissonComponent&) const = default;
};

/// Probability mass function over arrival counts {0, 1, 2, ...}.
///
/// Stored exactly as finite signed point masses plus a finite mixture of shifted
/// Poisson laws. That class is closed under convolution, so factorial moments and
/// the generating function are exact, never truncated. An explicit pmf array is
/// materialized up to the index where the remaining mass drops below 1e-14.
class CountDistribution {
public:
    static constexpr double kHeadTailMass = 1e-14;
    static constexpr double kNegativeTolerance = 1e-12;
    static constexpr long kNoSupport = std::numeric_limits<long>::max();

    CountDistribution() = default;

    static CountDistribution poisson(double mean, long shift = 0) {
        return CountDistribution({}, {PoissonComponent{1.0, mean, shift}});
    }

    /// `head` gives p_0..p_{K-1}; the components alone describe p_n for n >= K.
    static CountDistribution with_tail(std::vector<double> head, std::vector<PoissonComponent> tail) {
        long floor = static_cast<long>(head.size());
        for (std::size_t n = 0; n < head.size(); ++n) {
            if (head[n] != 0.0) {
                floor = static_cast<long>(n);
                break;
            }
        }
        if (floor == static_cast<long>(head.size())) {
            floor = std::max(floor, lowest_shift(tail));
        }
        std::vector<double> atoms(std::move(head));
        for (std::size_t n = 0; n < atoms.size(); ++n) {
            for (const auto& c : tail) {
                atoms[n] -= c.at(static_cast<long>(n));
            }
        }
        return CountDistribution(std::move(atoms), std::move(tail), floor);
    }

    /// Finite-support distribution, e.g. observed frequencies.
    static CountDistribution finite(std::vector<double> pmf) { return CountDistribution(std::move(pmf), {}); }

    /// Every p_n below this index is exactly zero.
    long support_floor() const noexcept { return floor_; }

    double pmf(long n) const {
        if (n < floor_) {
            return 0.0;
        }
        if (static_cast<std::size_t>(n) < head_.size()) {
            return head_[static_cast<std::size_t>(n)];
        }
        return std::max(0.0, raw(n));
    }

    double operator[](long n) const { return pmf(n); }

    /// Explicit part of the pmf; entries past its end carry < 1e-14 total mass.
    std::span<const double> head() const noexcept { return head_; }

    bool has_analytic_tail() const noexcept { return !components_.empty(); }
    std::span<const PoissonComponent> components() const noexcept { return components_; }
    std::span<const double> atoms() const noexcept { return atoms_; }

    double total_mass() const {
        double m = 0.0;
        for (double a : atoms_) {
            m += a;
        }
        for (const auto& c : components_) {
            m += c.weight;
        }
        return m;
    }

    /// G'(1) = E[N].
    double first_factorial_moment() const {
        double m = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            m += atoms_[i] * static_cast<double>(i);
        }
        for (const auto& c : components_) {
            m += c.weight * (static_cast<double>(c.shift) + c.mean);
        }
        return m;
    }

    /// G''(1) = E[N(N-1)].
    double second_factorial_moment() const {
        double m = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            const auto x = static_cast<double>(i);
            m += atoms_[i] * x * (x - 1.0);
        }
        for (const auto& c : components_) {
            const double mu = static_cast<double>(c.shift) + c.mean;
            m += c.weight * (mu * mu + c.mean - mu);
        }
        return m;
    }

    double mean() const { return first_factorial_moment(); }

    double variance() const {
        const double m1 = first_factorial_moment();
        return second_factorial_moment() + m1 - m1 * m1;
    }

    /// G(z) = sum_n p_n z^n, exact.
    double pgf(double z) const {
        double g = 0.0;
        double zi = 1.0;
        for (double a : atoms_) {
            g += a * zi;
            zi *= z;
        }
        for (const auto& c : components_) {
            g += c.weight * std::pow(z, static_cast<double>(c.shift)) * std::exp(-c.mean * (1.0 - z));
        }
        return g;
    }

    /// Mass on {n, n+1, ...}.
    double mass_from(long n) const {
        double m = 0.0;
        for (std::size_t i = static_cast<std::size_t>(std::max(0L, n)); i < atoms_.size(); ++i) {
            m += atoms_[i];
        }
        for (const auto& c : components_) {
            m += c.mass_from(n);
        }
        return m;
    }

    friend CountDistribution convolve(const CountDistribution& a, const CountDistribution& b) {
        std::vector<double> atoms;
        if (!a.atoms_.empty() && !b.atoms_.empty()) {
            atoms.assign(a.atoms_.size() + b.atoms_.size() - 1, 0.0);
            for (std::size_t i = 0; i < a.atoms_.size(); ++i) {
                for (std::size_t j = 0; j < b.atoms_.size(); ++j) {
                    atoms[i + j] += a.atoms_[i] * b.atoms_[j];
                }
            }
        }
        std::vector<PoissonComponent> comps;
        auto atoms_times = [&comps](const std::vector<double>& xs, const std::vector<PoissonComponent>& cs) {
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (xs[i] == 0.0) {
                    continue;
                }
                for (const auto& c : cs) {
                    comps.push_back({xs[i] * c.weight, c.mean, c.shift + static_cast<long>(i)});
                }
            }
        };
        atoms_times(a.atoms_, b.components_);
        atoms_times(b.atoms_, a.components_);
        for (const auto& ca : a.components_) {
            for (const auto& cb : b.components_) {
                comps.push_back({ca.weight * cb.weight, ca.mean + cb.mean, ca.shift + cb.shift});
            }
        }
        return CountDistribution(std::move(atoms), std::move(comps),
                                 std::min(a.floor_, kNoSupport - b.floor_) + b.floor_);
    }

    bool operator==(const CountDistribution&) const = default;

private:
    CountDistribution(std::vector<double> atoms, std::vector<PoissonComponent> comps, long floor = -1)
        : atoms_(std::move(atoms)), components_(merge(std::move(comps))) {
        floor_ = floor >= 0 ? floor : natural_floor();
        build_head();
    }

    // cancellation inside a signed mixture never yields an exact zero, hence the explicit floor
    long natural_floor() const {
        long f = lowest_shift(components_);
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            if (atoms_[i] != 0.0) {
                f = std::min(f, static_cast<long>(i));
                break;
            }
        }
        return std::max(0L, f);
    }

    static long lowest_shift(const std::vector<PoissonComponent>& comps) {
        long f = kNoSupport;
        for (const auto& c : comps) {
            if (c.weight != 0.0) {
                f = std::min(f, c.shift);
            }
        }
        return f;
    }

    static std::vector<PoissonComponent> merge(std::vector<PoissonComponent> comps) {
        std::map<std::pair<double, long>, double> by_key;
        for (const auto& c : comps) {
            by_key[{c.mean, c.shift}] += c.weight;
        }
        std::vector<PoissonComponent> out;
        out.reserve(by_key.size());
        for (const auto& [key, w] : by_key) {
            if (w != 0.0) {
                out.push_back({w, key.first, key.second});
            }
        }
        return out;
    }

    double raw(long n) const {
        double p = static_cast<std::size_t>(n) < atoms_.size() ? atoms_[static_cast<std::size_t>(n)] : 0.0;
        for (const auto& c : components_) {
            p += c.at(n);
        }
        return p;
    }

    double tail_bound(long n) const {
        double bound = 0.0;
        for (const auto& c : components_) {
            bound += std::abs(c.weight) * poisson_sf(n - c.shift, c.mean);
        }
        return bound;
    }

    void build_head() {
        constexpr long kMaxHead = 50'000'000;
        head_.clear();
        for (long n = 0;; ++n) {
            const bool past_atoms = static_cast<std::size_t>(n) >= atoms_.size();
            if (past_atoms && tail_bound(n) < kHeadTailMass) {
                break;
            }
            if (n >= kMaxHead) {
                throw DomainError("count distribution too wide to materialize");
            }
            double p = n < floor_ ? 0.0 : raw(n);
            if (p < 0.0) {
                if (p < -kNegativeTolerance) {
                    throw ConsistencyError("negative probability mass at n = " + std::to_string(n));
                }
                p = 0.0;
            }
            head_.push_back(p);
        }
    }

    std::vector<double> atoms_;
    std::vector<PoissonComponent> components_;
    std::vector<double> head_;
    long floor_ = 0;
};

/// 1/2 sum_n |p_n - q_n|, summed over both heads (remaining mass is below 1e-14 each).
inline double total_variation(const CountDistribution& p, const CountDistribution& q) {
    const auto len = static_cast<long>(std::max(p.head().size(), q.head().size()));
    double tv = 0.0;
    for (long n = 0; n < len; ++n) {
        tv += std::abs(p.pmf(n) - q.pmf(n));
    }
    return 0.5 * tv;
}

} // namespace eee
