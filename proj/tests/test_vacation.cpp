#include "eee/vacation.hpp"
#include "eee/performance.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using Catch::Approx;
using namespace eee;

namespace {

ProtocolConfig tau_and_n(double tau, long n) {
    ProtocolConfig c;
    c.timer_threshold = tau;
    c.counter_threshold = n;
    return c;
}

ProtocolConfig tau_only(double tau) {
    ProtocolConfig c;
    c.timer_threshold = tau;
    return c;
}

ProtocolConfig n_only(long n) {
    ProtocolConfig c;
    c.counter_threshold = n;
    return c;
}

/// Random valid configuration covering all four policies.
ProtocolConfig random_config(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> tau(0.5, 200.0);
    std::uniform_int_distribution<long> n(1, 60);
    std::uniform_int_distribution<int> kind(0, 3);
    switch (kind(rng)) {
    case 0: return tau_only(tau(rng));
    case 1: return n_only(n(rng));
    case 2: return tau_and_n(tau(rng), 1);
    default: return tau_and_n(tau(rng), n(rng));
    }
}

} // namespace

TEST_CASE("a_0 is zero and a_1 is exp(-lambda tau)", "[vacation]") {
    const auto a = sleep_lpi_arrival_dist(tau_and_n(30.0, 11), 1.0 / 3.0);
    CHECK(a.pmf(0) == 0.0);
    CHECK(a.pmf(1) == Approx(std::exp(-10.0)).epsilon(1e-12));
    CHECK(a.total_mass() == Approx(1.0).epsilon(1e-13));
}

TEST_CASE("tau-only a_n is a shifted Poisson", "[vacation]") {
    const auto a = sleep_lpi_arrival_dist(tau_only(30.0), 0.2);
    for (long n = 1; n < 20; ++n) {
        CHECK(a.pmf(n) == Approx(poisson_pmf(n - 1, 6.0)));
    }
}

TEST_CASE("a_n above N follows the Sleep-period Poisson tail", "[vacation]") {
    const double lambda = 2.0; // many arrivals during Sleep
    const auto a = sleep_lpi_arrival_dist(tau_and_n(10.0, 3), lambda);
    for (long n = 4; n < 20; ++n) {
        CHECK(a.pmf(n) == Approx(poisson_pmf(n, lambda * kDefaultSleepUs)));
    }
}

TEST_CASE("a_n matches the Monte-Carlo event tree", "[vacation][oracle]") {
    const auto cfg = tau_and_n(10.0, 4);
    const double lambda = 0.5;
    const auto mc = testing::monte_carlo_sleep_lpi_pmf(cfg, lambda, 1'000'000, 2024);
    const auto a = sleep_lpi_arrival_dist(cfg, lambda);
    CHECK(total_variation(a, CountDistribution::finite(mc)) < 0.005);
}

TEST_CASE("Sleep-LPI mean arrivals agree with the Monte-Carlo oracle within 3 sigma", "[vacation][oracle]") {
    const auto cfg = tau_and_n(20.0, 5);
    const double lambda = 0.4;
    std::mt19937_64 rng(99);
    const long trials = 1'000'000;
    double s = 0.0, s2 = 0.0;
    for (long i = 0; i < trials; ++i) {
        const auto k = static_cast<double>(testing::sample_sleep_lpi_arrivals(cfg, lambda, rng));
        s += k;
        s2 += k * k;
    }
    const double mean = s / trials;
    const double sd = std::sqrt((s2 / trials - mean * mean) / trials);
    const double exact = mean_arrivals_closed_form(cfg, lambda) - lambda * cfg.wakeup_duration;
    CHECK(std::abs(mean - exact) < 3.0 * sd);
}

TEST_CASE("b_n is Poisson over the Wakeup period", "[vacation]") {
    ProtocolConfig cfg = tau_and_n(30.0, 11);
    const double lambda = 0.896 / cfg.wakeup_duration;
    const auto b = wakeup_arrival_dist(cfg, lambda);
    CHECK(b.pmf(0) == Approx(std::exp(-0.896)));
    CHECK(b.mean() == Approx(0.896));
    CHECK(wakeup_arrival_dist(cfg, 1e-12).pmf(0) == Approx(1.0));
}

TEST_CASE("FTR vacation moments", "[vacation]") {
    const ProtocolConfig ftr = n_only(1);
    const auto m = ftr_h_moments(0.2, ftr);
    CHECK(m.first == Approx(2.0341).margin(5e-5));
    CHECK(m.second == Approx(3.1741).margin(5e-5));
    CHECK(ftr_h_moments(1e-9, ftr).first == Approx(1.0).epsilon(1e-6));
    CHECK(mean_arrivals_closed_form(ftr, 0.2) == Approx(m.first).epsilon(1e-14));
    for (double lambda : {0.01, 0.2, 1.0 / 3.0, 0.6, 0.95}) {
        const auto h = factorial_moments(vacation_arrival_dist(ftr, lambda));
        const auto f = ftr_h_moments(lambda, ftr);
        CHECK(h.first == Approx(f.first).epsilon(1e-12));
        CHECK(h.second == Approx(f.second).epsilon(1e-12));
    }
}

TEST_CASE("N-only mean arrivals reduce to N + lambda T_w without Sleep", "[vacation]") {
    ProtocolConfig cfg = n_only(11);
    cfg.sleep_duration = 1e-12;
    CHECK(mean_arrivals_closed_form(cfg, 0.3) == Approx(11.0 + 0.3 * cfg.wakeup_duration).epsilon(1e-10));
}

TEST_CASE("mean vacation examples", "[vacation]") {
    CHECK(mean_vacation(tau_only(30.0), 0.2) == Approx(39.48).epsilon(1e-14));
    CHECK(mean_vacation_n_policy_approx(11, 0.2, kDefaultWakeupUs) == Approx(59.48).epsilon(1e-14));
    const auto cfg = n_only(11);
    CHECK(mean_vacation(cfg, 0.2) == Approx(mean_arrivals_closed_form(cfg, 0.2) / 0.2).epsilon(1e-15));
}

TEST_CASE("normalization, empty vacations and pgf moments on random configs", "[vacation][property]") {
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> rate(0.01, 0.99);
    for (int trial = 0; trial < 300; ++trial) {
        const auto cfg = random_config(rng);
        const double lambda = rate(rng);
        INFO("trial " << trial << " lambda " << lambda << " policy " << to_string(policy_of(cfg)));
        const auto a = sleep_lpi_arrival_dist(cfg, lambda);
        const auto b = wakeup_arrival_dist(cfg, lambda);
        const auto h = vacation_arrival_dist(cfg, lambda);
        CHECK(a.total_mass() == Approx(1.0).margin(1e-12));
        CHECK(b.total_mass() == Approx(1.0).margin(1e-12));
        CHECK(h.total_mass() == Approx(1.0).margin(1e-12));
        CHECK(a.pmf(0) == 0.0);
        CHECK(h.pmf(0) == 0.0);

        const double a1 = a.first_factorial_moment(), b1 = b.first_factorial_moment();
        CHECK(h.first_factorial_moment() == Approx(a1 + b1).epsilon(1e-10));
        CHECK(h.second_factorial_moment() ==
              Approx(a.second_factorial_moment() + 2.0 * a1 * b1 + b.second_factorial_moment()).epsilon(1e-10));

        // convolution moments against the closed-form sums
        CHECK(h.first_factorial_moment() == Approx(mean_arrivals_closed_form(cfg, lambda)).epsilon(1e-10));
        if (cfg.has_counter()) {
            const auto t = detail::closed_form_delay_terms(cfg, lambda);
            CHECK(h.first_factorial_moment() == Approx(t.denominator).epsilon(1e-10));
            CHECK(h.second_factorial_moment() == Approx(t.numerator).epsilon(1e-10));
        }
        CHECK(mean_vacation(cfg, lambda) == Approx(h.first_factorial_moment() / lambda).epsilon(1e-10));
    }
}

TEST_CASE("min-approximation of the mean vacation is within 5% outside the crossover band",
          "[vacation][approx]") {
    for (double tau : {10.0, 30.0, 100.0}) {
        for (long n : {11L, 21L, 41L}) {
            const auto cfg = tau_and_n(tau, n);
            const double crossover = static_cast<double>(n - 1) / tau;
            for (int i = 1; i <= 95; ++i) {
                const double lambda = 0.01 * i;
                if (std::abs(lambda - crossover) / lambda <= 0.5) {
                    continue;
                }
                INFO("tau " << tau << " N " << n << " lambda " << lambda);
                CHECK(mean_vacation_approx(cfg, lambda) == Approx(mean_vacation(cfg, lambda)).epsilon(0.05));
            }
        }
    }
}

TEST_CASE("invalid inputs are rejected", "[vacation]") {
    CHECK_THROWS_AS(sleep_lpi_arrival_dist(ProtocolConfig{}, 0.2), ConfigError);
    CHECK_THROWS_AS(sleep_lpi_arrival_dist(n_only(0), 0.2), ConfigError);
    CHECK_THROWS_AS(sleep_lpi_arrival_dist(n_only(3), 0.0), DomainError);
    CHECK_THROWS_AS(sleep_lpi_arrival_dist(tau_only(-1.0), 0.2), ConfigError);
}
