#include "eee/planner.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using Catch::Approx;
using namespace eee;
using namespace eee::plan;

namespace {

TrafficModel traffic_at(double lambda) { return {lambda, DeterministicService{1.0}}; }

PlanResult plan_relative(double lambda, double multiplier, Objective objective = Objective::NearestDelay) {
    return eee::plan::plan({traffic_at(lambda), DelayBudget::relative(multiplier), ProtocolConfig{}, objective});
}

} // namespace

TEST_CASE("timer from counter", "[planner]") {
    CHECK(*tau_for(11, 0.2) == Approx(50.0).epsilon(1e-15));
    CHECK(*tau_for(17, 1.0 / 3.0) == Approx(48.0).epsilon(1e-15));
    CHECK(*tau_for(2, 0.6) == Approx(1.667).margin(5e-4));
    CHECK_FALSE(tau_for(1, 0.2).has_value());
    CHECK_THROWS_AS(tau_for(0, 0.2), DomainError);
    CHECK_THROWS_AS(tau_for(3, 0.0), DomainError);
}

TEST_CASE("plan reproduces table rows", "[planner]") {
    const auto r = plan_relative(0.2, 5.20);
    CHECK(r.counter_threshold == 11);
    REQUIRE(r.timer_threshold.has_value());
    CHECK(*r.timer_threshold == Approx(50.0));
    CHECK(r.ftr_delay == Approx(5.0261).margin(1e-4));
    CHECK(r.predicted_efficiency / r.ftr_efficiency == Approx(3.12).epsilon(0.02));

    const auto r2 = plan_relative(1.0 / 3.0, 2.05);
    CHECK(r2.counter_threshold == 6);
    CHECK(*r2.timer_threshold == Approx(15.0));

    // printed as "65 | 105"; only N = 64 gives tau = 105 under the coupling
    const auto r3 = plan_relative(0.6, 9.92);
    CHECK(r3.counter_threshold == 64);
    CHECK(*r3.timer_threshold == Approx(105.0).epsilon(0.03));
}

TEST_CASE("budget at the FTR floor yields FTR", "[planner]") {
    const auto r = plan_relative(0.2, 1.0);
    CHECK(r.is_ftr());
    CHECK_FALSE(r.timer_threshold.has_value());
    CHECK(r.predicted_delay_exact == Approx(r.ftr_delay));
    const auto w = plan_relative(0.2, 1.0, Objective::WithinBudget);
    CHECK(w.is_ftr());
}

TEST_CASE("infeasible budgets report the floor", "[planner]") {
    const PlanRequest below{traffic_at(0.2), DelayBudget::absolute(4.0), ProtocolConfig{}};
    try {
        eee::plan::plan(below);
        FAIL("expected InfeasiblePlan");
    } catch (const InfeasiblePlan& e) {
        CHECK(e.floor_us() == Approx(5.0261).margin(1e-4));
    }
    const PlanRequest beyond{traffic_at(0.2), DelayBudget::absolute(1e9), ProtocolConfig{}};
    CHECK_THROWS_AS(eee::plan::plan(beyond), InfeasiblePlan);
    const PlanRequest unstable{traffic_at(1.5), DelayBudget::relative(2.0), ProtocolConfig{}};
    CHECK_THROWS_AS(eee::plan::plan(unstable), StabilityError);
}

TEST_CASE("plan objectives pick the right neighbour", "[planner][property]") {
    for (double lambda : {0.1, 0.2, 1.0 / 3.0, 0.6, 0.85}) {
        const auto t = traffic_at(lambda);
        const ProtocolConfig base;
        for (double mult : {1.05, 1.5, 2.0, 3.7, 5.0, 10.0, 20.0, 55.0}) {
            INFO("lambda " << lambda << " multiplier " << mult);
            const auto nearest = plan_relative(lambda, mult);
            const long n = nearest.counter_threshold;
            const double budget = nearest.budget_us;
            const double gap = std::abs(coupled_delay(base, t, n) - budget);
            CHECK(gap <= std::abs(coupled_delay(base, t, n + 1) - budget));
            if (n > 1) {
                CHECK(gap <= std::abs(coupled_delay(base, t, n - 1) - budget));
            }

            const auto within = plan_relative(lambda, mult, Objective::WithinBudget);
            const long m = within.counter_threshold;
            CHECK(coupled_delay(base, t, m) <= within.budget_us);
            CHECK(coupled_delay(base, t, m + 1) > within.budget_us);
            CHECK(std::abs(m - n) <= 1);

            // coupling holds to machine precision
            for (const auto& r : {nearest, within}) {
                if (!r.is_ftr()) {
                    const double implied = static_cast<double>(r.counter_threshold - 1) / *r.timer_threshold;
                    CHECK(std::abs(implied - lambda) <= 4 * std::numeric_limits<double>::epsilon() * lambda);
                }
            }
        }
    }
}

TEST_CASE("plan reports both delay predictions", "[planner]") {
    const auto r = plan_relative(1.0 / 3.0, 5.09);
    CHECK(r.predicted_delay_exact == Approx(coupled_delay(ProtocolConfig{}, traffic_at(1.0 / 3.0), r.counter_threshold)));
    CHECK(r.predicted_delay_rule ==
          Approx(mean_delay_n_policy_approx(r.counter_threshold, traffic_at(1.0 / 3.0), kDefaultWakeupUs)));
    CHECK(r.efficiency_ceiling == Approx(0.6));
}

TEST_CASE("tradeoff sweep", "[planner][sweep]") {
    const auto t = traffic_at(1.0 / 3.0);
    const auto rows = tradeoff_sweep(t, ProtocolConfig{}, 1, 512);
    REQUIRE(rows.size() == 512);
    CHECK(rows[0].delay == Approx(5.0380).margin(2e-4));
    CHECK(rows[0].efficiency == Approx(0.0810).margin(2e-4));
    CHECK_FALSE(rows[0].tau.has_value());
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].efficiency >= rows[i - 1].efficiency);
        CHECK(rows[i].efficiency < 0.6);
        if (i >= 2) {
            CHECK(rows[i].delay > rows[i - 1].delay);
        }
        CHECK(*rows[i].tau == Approx(static_cast<double>(rows[i].counter - 1) * 3.0));
    }
    CHECK(rows.back().efficiency > 0.58);
    for (long n = 64; n <= 256; n *= 2) {
        const double ratio = rows[static_cast<std::size_t>(2 * n - 1)].delay / rows[static_cast<std::size_t>(n - 1)].delay;
        CHECK(ratio == Approx(2.0).epsilon(0.10));
    }
    CHECK_THROWS_AS(tradeoff_sweep(t, ProtocolConfig{}, 5, 4), DomainError);
    CHECK_THROWS_AS(tradeoff_sweep(t, ProtocolConfig{}, 0, 4), DomainError);
}

TEST_CASE("table rows are reproduced by the exact formulas", "[planner][table]") {
    const auto checks = reproduce_table1(ProtocolConfig{}, DeterministicService{1.0});
    REQUIRE(checks.size() == 15);
    int matched = 0;
    for (const auto& c : checks) {
        INFO("lambda " << c.printed.lambda << " N " << c.printed.counter);
        CHECK(std::abs(c.delay_relative_error()) <= 0.03);
        CHECK(std::abs(c.efficiency_relative_error()) <= 0.03);
        matched += c.planned_counter == c.printed.counter ? 1 : 0;
    }
    CHECK(matched >= 13);
}
