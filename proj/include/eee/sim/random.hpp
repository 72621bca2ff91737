#pragma once

#include "eee/config.hpp"

#include <cstdint>
#include <random>
#include <type_traits>
#include <variant>

namespace eee::sim {

/// SplitMix64 finalizer; spreads a user seed into well-separated stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class Stream : std::uint64_t { Arrivals = 1, Service = 2 };

/// mt19937_64 for one named stream: seeded with splitmix64(seed ^ splitmix64(stream id)).
inline std::mt19937_64 make_stream(std::uint64_t seed, Stream stream) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream))));
}

/// Draws service times from a TrafficModel's law. Construct once per run.
class ServiceSampler {
public:
    explicit ServiceSampler(const ServiceLaw& law) : law_(law) {
        validate(law_);
        if (const auto* e = std::get_if<EmpiricalService>(&law_)) {
            table_ = std::discrete_distribution<std::size_t>(e->probabilities.begin(), e->probabilities.end());
        } else if (const auto* x = std::get_if<ExponentialService>(&law_)) {
            exponential_ = std::exponential_distribution<double>(1.0 / x->mean);
        }
    }

    template <class Rng>
    double operator()(Rng& rng) {
        return std::visit(
            [&](const auto& l) -> double {
                using L = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<L, DeterministicService>) {
                    return l.value;
                } else if constexpr (std::is_same_v<L, ExponentialService>) {
                    return exponential_(rng);
                } else {
                    return l.values[table_(rng)];
                }
            },
            law_);
    }

private:
    ServiceLaw law_;
    std::exponential_distribution<double> exponential_;
    std::discrete_distribution<std::size_t> table_;
};

/// One service time. Prefer a long-lived ServiceSampler inside loops.
template <class Rng>
double sample_service(const TrafficModel& traffic, Rng& rng) {
    ServiceSampler sampler(traffic.service);
    return sampler(rng);
}

} // namespace eee::sim
