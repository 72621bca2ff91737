// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "eee/eee.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace eee;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

TrafficModel unit_service(double lambda) { return {lambda, DeterministicService{1.0}}; }

ProtocolConfig thresholds(std::optional<double> tau, std::optional<long> n) {
    ProtocolConfig c;
    c.timer_threshold = tau;
    c.counter_threshold = n;
    return c;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

Outcome ftr_reproduction() {
    struct Row {
        double lambda, delay, efficiency;
    };
    const Row rows[] = {{0.2, 5.0261, 0.1990}, {1.0 / 3.0, 5.0380, 0.0810}, {0.6, 5.4609, 0.0139}};
    ProtocolConfig ftr = thresholds(std::nullopt, 1);
    Outcome o{true, ""};
    for (const auto& r : rows) {
        const auto t = unit_service(r.lambda);
        const double d = mean_delay_closed_form(ftr, t);
        const double e = power_efficiency(ftr, t);
        o.pass = o.pass && std::abs(d - r.delay) <= 2e-4 && std::abs(e - r.efficiency) <= 2e-4;
        o.detail += fmt("lambda=%.4f D=%.6f (%.4f) eta=%.6f", r.lambda, d, r.delay, e) + fmt(" (%.4f); ", r.efficiency);
    }
    return o;
}

Outcome table_reproduction() {
    const auto checks = plan::reproduce_table1(ProtocolConfig{}, DeterministicService{1.0});
    int ok = 0;
    double worst = 0.0;
    for (const auto& c : checks) {
        const double err = std::max(std::abs(c.delay_relative_error()), std::abs(c.efficiency_relative_error()));
        worst = std::max(worst, err);
        ok += err <= 0.03 ? 1 : 0;
    }
    return {ok == 15, fmt("%.0f/15 rows within 3%%, worst relative error %.2f%%", ok, 100.0 * worst)};
}

Outcome planner_round_trip() {
    const auto checks = plan::reproduce_table1(ProtocolConfig{}, DeterministicService{1.0});
    int matched = 0;
    bool coupled = true;
    std::string misses;
    for (const auto& c : checks) {
        const auto t = unit_service(c.printed.lambda);
        const auto r = plan::plan({t, plan::DelayBudget::relative(c.printed.delay_multiplier), ProtocolConfig{}});
        if (r.counter_threshold == c.printed.counter) {
            ++matched;
        } else {
            misses += fmt(" lambda=%.3f printed N=%.0f planned N=%.0f", c.printed.lambda,
                          static_cast<double>(c.printed.counter), static_cast<double>(r.counter_threshold));
        }
        if (!r.is_ftr()) {
            coupled = coupled && *r.timer_threshold == static_cast<double>(r.counter_threshold - 1) / c.printed.lambda;
        }
    }
    return {matched >= 13 && coupled,
            fmt("%.0f/15 rows recover the printed N, tau coupling exact:", matched) + (coupled ? " yes" : " no") +
                (misses.empty() ? "" : ";" + misses)};
}

Outcome simulation_agreement() {
    const double lambdas[] = {0.2, 1.0 / 3.0, 0.8};
    int cells = 0;
    std::string detail;
    for (double lambda : lambdas) {
        for (int kind = 0; kind < 3; ++kind) {
            sim::SimConfig c;
            c.protocol = thresholds(kind == 1 ? std::nullopt : std::optional<double>(30.0),
                                    kind == 0 ? std::nullopt : std::optional<long>(11));
            c.traffic = unit_service(lambda);
            c.frame_budget = 1'000'000;
            c.rng_seed = 1;
            const auto r = sim::run_simulation(c);
            const double d = mean_delay_closed_form(c.protocol, c.traffic);
            const double e = power_efficiency(c.protocol, c.traffic);
            const bool ok = r.mean_delay.contains(d) && r.power_efficiency.contains(e);
            cells += ok ? 1 : 0;
            if (!ok) {
                detail += " [lambda=" + fmt("%.3f", lambda) + " " + std::string(to_string(policy_of(c.protocol))) +
                          fmt(": D %.4f vs %.4f+-%.4f", d, r.mean_delay.value, r.mean_delay.half_width) +
                          fmt(", eta %.5f vs %.5f+-%.5f]", e, r.power_efficiency.value, r.power_efficiency.half_width);
            }
        }
    }
    return {cells >= 8, fmt("%.0f/9 cells with analytic D and eta inside the 95%% CI (seed 1, 1e6 frames)", cells) +
                            (detail.empty() ? "" : ";" + detail)};
}

Outcome classical_counterexample() {
    const double lambdas[] = {0.05, 0.1, 0.2, 0.4, 0.8};
    bool below = true;
    std::vector<double> gaps;
    std::string detail;
    for (double lambda : lambdas) {
        sim::SimConfig c;
        c.protocol = thresholds(30.0, std::nullopt);
        c.traffic = unit_service(lambda);
        c.frame_budget = 10'000'000; // the gap at lambda = 0.8 is only ~0.04 us
        c.rng_seed = 1;
        const auto r = sim::run_simulation(c);
        const double classical = tau_policy_vacation_law(lambda, 30.0, c.protocol.wakeup_duration).classical_delay(c.traffic);
        below = below && r.mean_delay.value < classical;
        gaps.push_back(classical - r.mean_delay.value);
        detail += fmt(" lambda=%.2f: classical %.4f sim %.4f+-%.4f;", lambda, classical, r.mean_delay.value,
                      r.mean_delay.half_width);
    }
    const bool shrinking = gaps.front() > gaps.back();
    return {below && shrinking,
            std::string("simulated < classical at every rate: ") + (below ? "yes" : "no") +
                fmt(", gap(0.05)=%.4f > gap(0.8)=%.4f;", gaps.front(), gaps.back()) + detail};
}

Outcome property_suites() {
    int checks = 0;
    int failures = 0;
    std::string failed;
    auto expect = [&](bool ok, const std::string& what) {
        ++checks;
        if (!ok) {
            ++failures;
            if (failed.size() < 400) failed += " " + what;
        }
    };
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };

    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> rate(0.01, 0.99), tau(0.5, 200.0);
    std::uniform_int_distribution<long> counter(1, 60);
    std::uniform_int_distribution<int> kind(0, 3);
    for (int i = 0; i < 200; ++i) {
        const int k = kind(rng);
        const auto cfg = thresholds(k == 1 ? std::nullopt : std::optional<double>(tau(rng)),
                                    k == 0 ? std::nullopt : std::optional<long>(k == 2 ? 1 : counter(rng)));
        const double lambda = rate(rng);
        const auto a = sleep_lpi_arrival_dist(cfg, lambda);
        const auto b = wakeup_arrival_dist(cfg, lambda);
        const auto h = vacation_arrival_dist(cfg, lambda);
        expect(std::abs(a.total_mass() - 1) <= 1e-12 && std::abs(b.total_mass() - 1) <= 1e-12 &&
                   std::abs(h.total_mass() - 1) <= 1e-12,
               "normalization");
        expect(a.pmf(0) == 0.0 && h.pmf(0) == 0.0, "empty-vacation");
        expect(rel(h.first_factorial_moment(), mean_arrivals_closed_form(cfg, lambda)) <= 1e-10, "H'(1)");
        const double a1 = a.first_factorial_moment(), b1 = b.first_factorial_moment();
        expect(rel(h.second_factorial_moment(),
                   a.second_factorial_moment() + 2 * a1 * b1 + b.second_factorial_moment()) <= 1e-10,
               "H''(1)");
        if (cfg.has_counter()) {
            expect(rel(h.second_factorial_moment(), detail::closed_form_delay_terms(cfg, lambda).numerator) <= 1e-10,
                   "A-sum");
        }
    }
    for (double lambda : {0.1, 0.2, 0.5, 0.8}) {
        const auto t = unit_service(lambda);
        for (double tv : {5.0, 10.0, 20.0}) {
            if (lambda * tv <= 20.0) {
                expect(rel(mean_delay_closed_form(thresholds(tv, 200), t),
                           mean_delay_tau_policy(t, tv, kDefaultWakeupUs)) <= 1e-9,
                       "tau limit");
            }
        }
        for (long n : {1L, 2L, 11L, 50L}) {
            expect(rel(mean_delay_closed_form(thresholds(1e6, n), t),
                       mean_delay_n_policy(thresholds(std::nullopt, n), t)) <= 1e-9,
                   "N limit");
        }
        for (double v : {1.0, 7.36, 50.0}) {
            const auto hv = factorial_moments(CountDistribution::poisson(lambda * v));
            expect(rel(mean_delay_from_moments(t, hv), classical_pk_delay(t, v, v * v)) <= 1e-10, "classical");
        }
    }
    {
        const auto t = unit_service(1.0 / 3.0);
        const ProtocolConfig c = thresholds(std::nullopt, 1);
        const double ceiling = efficiency_ceiling(c, t);
        for (int i = 1; i <= 18; ++i) {
            const double eta = 0.05 * i * ceiling;
            const double step = 1e-5 * ceiling;
            const double fd =
                (delay_of_efficiency(c, t, eta + step) - delay_of_efficiency(c, t, eta - step)) / (2 * step);
            expect(rel(delay_of_efficiency_derivative(c, t, eta), fd) <= 1e-4, "derivative");
        }
    }
    for (double lambda : {0.05, 0.2, 1.0 / 3.0, 0.6, 0.9}) {
        const auto t = unit_service(lambda);
        const ProtocolConfig base;
        double prev_d = plan::coupled_delay(base, t, 2);
        double prev_e = power_efficiency(plan::coupled_config(base, 1, lambda), t);
        bool mono = true;
        for (long n = 2; n <= 300; ++n) {
            const auto cfg = plan::coupled_config(base, n, lambda);
            const double d = mean_delay_closed_form(cfg, t);
            const double e = power_efficiency(cfg, t);
            mono = mono && (n == 2 || d > prev_d) && e <= efficiency_ceiling(cfg, t);
            prev_d = d;
            // eta is compared only where the timer outlasts Sleep
            if (*cfg.timer_threshold >= cfg.sleep_duration) {
                mono = mono && e >= prev_e;
                prev_e = e;
            }
        }
        expect(mono, "monotone");
    }
    {
        sim::SimConfig c;
        c.protocol = thresholds(30.0, 11);
        c.traffic = unit_service(0.3);
        c.frame_budget = 200'000;
        const auto r1 = sim::run_simulation(c);
        const auto r2 = sim::run_simulation(c);
        expect(r1 == r2, "determinism");
        expect(r1.state_times.total() == r1.simulated_time, "state-time conservation");
        expect(r1.frames_departed == r1.frames_generated - r1.frames_queued_at_stop, "frame conservation");
    }
    return {failures == 0, fmt("%.0f/%.0f property checks hold", checks - failures, checks) +
                               (failed.empty() ? "" : "; failed:" + failed)};
}

Outcome wakeup_crossover() {
    const double crossover = 10.0 / 30.0;
    const std::int64_t cycles = 100'000;
    double fractions[2] = {0, 0};
    std::int64_t observed[2] = {0, 0};
    const double lambdas[2] = {0.5 * crossover, 2.0 * crossover};
    for (int i = 0; i < 2; ++i) {
        sim::SimConfig c;
        c.protocol = thresholds(30.0, 11);
        c.traffic = unit_service(lambdas[i]);
        const double per_cycle = mean_arrivals_closed_form(c.protocol, lambdas[i]) / (1.0 - lambdas[i]);
        c.frame_budget = static_cast<std::int64_t>(std::ceil(per_cycle * cycles));
        c.rng_seed = 1;
        const auto r = sim::run_simulation(c);
        fractions[i] = r.wakeup_causes.timer_fraction();
        observed[i] = r.cycles_observed;
    }
    return {fractions[0] > 0.5 && fractions[1] < 0.5,
            fmt("timer fraction %.3f at lambda=%.4f (%.0f cycles), ", fractions[0], lambdas[0],
                static_cast<double>(observed[0])) +
                fmt("%.3f at lambda=%.4f (%.0f cycles)", fractions[1], lambdas[1], static_cast<double>(observed[1]))};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "FTR exact reproduction", ftr_reproduction},
        {2, "parameter-selection table reproduction", table_reproduction},
        {3, "delay-budget planner round trip", planner_round_trip},
        {4, "simulation/analysis agreement grid", simulation_agreement},
        {5, "classical P-K counterexample", classical_counterexample},
        {6, "property suites", property_suites},
        {7, "wakeup-cause crossover", wakeup_crossover},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += o.pass ? 0 : 1;
        std::printf("%s criterion %d (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
