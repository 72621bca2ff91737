// eee_cli: evaluate, simulate, sweep and plan BTR/EEE interfaces from the command line.
//
// Exit codes: 0 ok, 1 property check failed (counterexample), 2 unstable traffic,
// 3 infeasible plan, 64 usage error, 65 statistical setup error.

#include "eee/eee.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitCheckFailed = 1;
constexpr int kExitStability = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitUsage = 64;
constexpr int kExitStatistical = 65;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::optional<double> lambda;
    std::string tau;
    std::string n;
    bool ftr = false;
    double ts = eee::kDefaultSleepUs;
    double tw = eee::kDefaultWakeupUs;
    double phi_high = 1.0;
    std::optional<double> phi_low;
    std::string service = "det";
    std::string service_file;
    double xbar = 1.0;

    std::int64_t frames = 1'000'000;
    std::uint64_t seed = 1;
    int batches = 20;
    std::int64_t warmup_cycles = 100;
    std::string trace;

    std::string sweep;
    std::optional<double> from;
    std::optional<double> to;
    std::optional<int> points;
    bool with_sim = false;
    std::vector<double> lambdas;

    std::optional<double> delay_budget;
    std::optional<double> delay_multiplier;
    std::string objective = "nearest";

    std::string format;
    std::string output;
};

// ---- parsing helpers ------------------------------------------------------

bool is_infinite_word(const std::string& s) {
    return s == "inf" || s == "infinity" || s == "none" || s == "INF" || s == "Inf";
}

std::optional<double> parse_tau(const std::string& s) {
    if (s.empty() || is_infinite_word(s)) {
        return std::nullopt;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw UsageError("--tau expects a time in us or 'inf', got '" + s + "'");
    }
    if (used != s.size()) {
        throw UsageError("--tau expects a time in us or 'inf', got '" + s + "'");
    }
    return v;
}

std::optional<long> parse_counter(const std::string& s) {
    if (s.empty() || is_infinite_word(s)) {
        return std::nullopt;
    }
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(s, &used);
    } catch (const std::exception&) {
        throw UsageError("--n expects a positive integer or 'inf', got '" + s + "'");
    }
    if (used != s.size()) {
        throw UsageError("--n expects a positive integer or 'inf', got '" + s + "'");
    }
    return v;
}

/// "value,probability" per line; '#' starts a comment.
eee::EmpiricalService read_service_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot open service file '" + path + "'");
    }
    eee::EmpiricalService table;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        double value = 0.0, prob = 0.0;
        char comma = 0;
        std::istringstream row(line);
        if (!(row >> value >> comma >> prob) || comma != ',') {
            throw eee::ConfigError("malformed service table line: '" + line + "'");
        }
        table.values.push_back(value);
        table.probabilities.push_back(prob);
    }
    return table;
}

eee::ServiceLaw service_law(const Options& o) {
    eee::ServiceLaw law;
    if (o.service == "det") {
        law = eee::DeterministicService{o.xbar};
    } else if (o.service == "exp") {
        law = eee::ExponentialService{o.xbar};
    } else if (o.service == "file") {
        if (o.service_file.empty()) {
            throw UsageError("--service file needs --service-file");
        }
        law = read_service_table(o.service_file);
    } else {
        throw UsageError("--service must be det, exp or file");
    }
    eee::validate(law);
    return law;
}

/// Protocol timings and power levels; thresholds from --tau/--n/--ftr (may be both empty).
eee::ProtocolConfig protocol(const Options& o) {
    eee::ProtocolConfig p;
    p.sleep_duration = o.ts;
    p.wakeup_duration = o.tw;
    p.power_high = o.phi_high;
    p.power_low = o.phi_low.value_or(0.1 * o.phi_high);
    if (o.ftr) {
        if (!o.tau.empty() || !o.n.empty()) {
            throw UsageError("--ftr cannot be combined with --tau or --n");
        }
        p.counter_threshold = 1;
        return p;
    }
    p.timer_threshold = parse_tau(o.tau);
    p.counter_threshold = parse_counter(o.n);
    if (p.counter_threshold == 1) {
        p.timer_threshold.reset(); // the first arrival wakes the link; a timer never matters
    }
    return p;
}

eee::ProtocolConfig protocol_with_thresholds(const Options& o) {
    auto p = protocol(o);
    p.validate();
    return p;
}

double require_lambda(const Options& o) {
    if (!o.lambda) {
        throw UsageError("--lambda is required for this command");
    }
    return *o.lambda;
}

eee::TrafficModel traffic(const Options& o, double lambda) {
    eee::TrafficModel t{lambda, service_law(o)};
    t.validate();
    return t;
}

eee::plan::Objective objective(const Options& o) {
    if (o.objective == "nearest") {
        return eee::plan::Objective::NearestDelay;
    }
    if (o.objective == "within") {
        return eee::plan::Objective::WithinBudget;
    }
    throw UsageError("--objective must be nearest or within");
}

eee::sim::SimConfig sim_config(const Options& o, const eee::ProtocolConfig& p, const eee::TrafficModel& t) {
    eee::sim::SimConfig c;
    c.protocol = p;
    c.traffic = t;
    c.frame_budget = o.frames;
    c.rng_seed = o.seed;
    c.batch_count = o.batches;
    c.warmup_cycles = o.warmup_cycles;
    return c;
}

std::vector<double> grid(double from, double to, int points) {
    if (points < 1) {
        throw UsageError("--points must be at least 1");
    }
    if (!(from <= to) || (points > 1 && !(from < to))) {
        throw UsageError("empty or inverted range: --from must be below --to");
    }
    std::vector<double> xs;
    for (int i = 0; i < points; ++i) {
        xs.push_back(points == 1 ? from : from + (to - from) * i / (points - 1));
    }
    return xs;
}

// ---- manifest and output -------------------------------------------------

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json optional_json(const std::optional<long>& v) { return v ? json(*v) : json(nullptr); }

json protocol_json(const eee::ProtocolConfig& p) {
    return {{"sleep_duration_us", p.sleep_duration},
            {"wakeup_duration_us", p.wakeup_duration},
            {"timer_threshold_us", optional_json(p.timer_threshold)},
            {"counter_threshold", optional_json(p.counter_threshold)},
            {"power_high_w", p.power_high},
            {"power_low_w", p.power_low}};
}

json service_json(const Options& o) {
    json s = {{"law", o.service}};
    if (o.service == "file") {
        const auto table = read_service_table(o.service_file);
        s["source"] = o.service_file;
        s["values_us"] = table.values;
        s["probabilities"] = table.probabilities;
    } else {
        s["mean_us"] = o.xbar;
    }
    return s;
}

json manifest(const std::string& command, const Options& o, const std::vector<std::string>& argv,
              const std::string& format, json options) {
    const auto p = protocol(o);
    return {{"tool", "eee_cli"},
            {"command", command},
            {"argv", argv},
            {"parameters",
             {{"traffic", {{"arrival_rate_per_us", optional_json(o.lambda)}, {"service", service_json(o)}}},
              {"protocol", protocol_json(p)},
              {"options", std::move(options)}}},
            {"output_format", format},
            {"output_path", o.output.empty() ? "-" : o.output}};
}

std::string csv_cell(const json& v) {
    if (v.is_null()) {
        return "";
    }
    if (v.is_boolean()) {
        return v.get<bool>() ? "true" : "false";
    }
    if (v.is_number_integer() || v.is_number_unsigned()) {
        return v.dump();
    }
    if (v.is_number_float()) {
        const double x = v.get<double>();
        if (std::isinf(x)) {
            return x > 0 ? "inf" : "-inf";
        }
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.10g", x);
        return buf;
    }
    std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") != std::string::npos) {
        std::string quoted = "\"";
        for (char c : s) {
            quoted += c;
            if (c == '"') quoted += '"';
        }
        return quoted + "\"";
    }
    return s;
}

/// A result is either one record (object) or a table (rows sharing `columns`).
struct Result {
    json record = json::object();
    std::vector<std::string> columns;
    json rows = json::array();
    json summary = json::object();

    bool is_table() const { return !columns.empty(); }
};

std::string render(const Result& r, const json& m, const std::string& format) {
    std::ostringstream out;
    if (format == "json") {
        json doc = {{"manifest", m}};
        if (r.is_table()) {
            for (const auto& [k, v] : r.summary.items()) {
                doc[k] = v;
            }
            doc["columns"] = r.columns;
            doc["rows"] = r.rows;
        } else {
            for (const auto& [k, v] : r.record.items()) {
                doc[k] = v;
            }
        }
        out << doc.dump(2) << '\n';
        return out.str();
    }
    out << "# manifest: " << m.dump() << '\n';
    std::vector<std::string> columns = r.columns;
    json rows = r.rows;
    if (!r.is_table()) {
        for (const auto& [k, v] : r.record.items()) {
            columns.push_back(k);
        }
        rows = json::array({r.record});
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out << (i ? "," : "") << columns[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            out << (i ? "," : "") << csv_cell(row.contains(columns[i]) ? row[columns[i]] : json(nullptr));
        }
        out << '\n';
    }
    return out.str();
}

void emit(const std::string& text, const Options& o) {
    if (o.output.empty() || o.output == "-") {
        std::cout << text << std::flush;
        return;
    }
    std::ofstream f(o.output);
    if (!f) {
        throw UsageError("cannot write '" + o.output + "'");
    }
    f << text;
}

json table_row(const std::vector<std::string>& columns, const std::vector<json>& values) {
    json row = json::object();
    for (std::size_t i = 0; i < columns.size(); ++i) {
        row[columns[i]] = values[i];
    }
    return row;
}

// ---- commands -------------------------------------------------------------

Result analyze(const Options& o, json&) {
    const double lambda = require_lambda(o);
    const auto p = protocol_with_thresholds(o);
    const auto t = traffic(o, lambda);
    t.require_stable();
    const auto h = eee::factorial_moments(eee::vacation_arrival_dist(p, lambda));
    Result r;
    r.record = {{"policy", std::string(eee::to_string(eee::policy_of(p)))},
                {"lambda", lambda},
                {"utilization", t.utilization()},
                {"mean_vacation_us", eee::mean_vacation(p, lambda)},
                {"mean_vacation_approx_us", eee::mean_vacation_approx(p, lambda)},
                {"efficiency", eee::power_efficiency(p, t)},
                {"efficiency_approx", eee::power_efficiency_approx(p, t)},
                {"efficiency_max", eee::efficiency_ceiling(p, t)},
                {"mean_delay_us", eee::mean_delay_closed_form(p, t)},
                {"mean_delay_approx_us", eee::mean_delay_approx(p, t)},
                {"mean_delay_general_us", eee::mean_delay_from_moments(t, h)},
                {"h_first_factorial_moment", h.first},
                {"h_second_factorial_moment", h.second},
                {"mean_cycle_us", eee::mean_cycle(p, t)},
                {"mean_busy_period_us", eee::mean_busy_period(p, t)},
                {"mean_power_w", eee::mean_power(p, t)}};
    return r;
}

Result simulate(const Options& o, json& opts) {
    const double lambda = require_lambda(o);
    const auto p = protocol_with_thresholds(o);
    const auto t = traffic(o, lambda);
    t.require_stable();
    const auto cfg = sim_config(o, p, t);
    opts = {{"frames", o.frames}, {"seed", o.seed}, {"batches", o.batches}, {"warmup_cycles", o.warmup_cycles},
            {"trace", o.trace.empty() ? json(nullptr) : json(o.trace)}};

    eee::sim::SimReport rep;
    if (!o.trace.empty()) {
        std::ofstream trace(o.trace);
        if (!trace) {
            throw UsageError("cannot write trace '" + o.trace + "'");
        }
        rep = eee::sim::run_simulation(cfg, &trace);
    } else {
        rep = eee::sim::run_simulation(cfg);
    }
    const double d = eee::mean_delay_closed_form(p, t);
    const double e = eee::power_efficiency(p, t);
    const double v = eee::mean_vacation(p, lambda);
    Result r;
    r.record = {{"policy", std::string(eee::to_string(eee::policy_of(p)))},
                {"lambda", lambda},
                {"mean_delay_us", rep.mean_delay.value},
                {"mean_delay_half_width_us", rep.mean_delay.half_width},
                {"efficiency", rep.power_efficiency.value},
                {"efficiency_half_width", rep.power_efficiency.half_width},
                {"mean_vacation_us", rep.mean_vacation.value},
                {"mean_vacation_half_width_us", rep.mean_vacation.half_width},
                {"analytic_mean_delay_us", d},
                {"analytic_efficiency", e},
                {"analytic_mean_vacation_us", v},
                {"delay_ci_contains_analytic", rep.mean_delay.contains(d)},
                {"efficiency_ci_contains_analytic", rep.power_efficiency.contains(e)},
                {"cycles_observed", rep.cycles_observed},
                {"frames_observed", rep.frames_observed},
                {"wakeups_timer", rep.wakeup_causes.timer},
                {"wakeups_counter", rep.wakeup_causes.counter},
                {"wakeups_counter_during_sleep", rep.wakeup_causes.sleep_end_counter},
                {"timer_wakeup_fraction", rep.wakeup_causes.timer_fraction()},
                {"simulated_time_us", eee::sim::to_microseconds(rep.simulated_time)}};
    return r;
}

void add_sim_columns(const Options& o, const eee::ProtocolConfig& p, const eee::TrafficModel& t, json& row) {
    const auto rep = eee::sim::run_simulation(sim_config(o, p, t));
    row["sim_delay_us"] = rep.mean_delay.value;
    row["sim_delay_half_width_us"] = rep.mean_delay.half_width;
    row["sim_efficiency"] = rep.power_efficiency.value;
    row["sim_efficiency_half_width"] = rep.power_efficiency.half_width;
}

const std::vector<std::string> kSimColumns = {"sim_delay_us", "sim_delay_half_width_us", "sim_efficiency",
                                              "sim_efficiency_half_width"};

Result sweep_lambda(const Options& o, json& opts) {
    const auto p = protocol_with_thresholds(o);
    const auto xs = grid(o.from.value_or(0.05), o.to.value_or(0.95), o.points.value_or(19));
    if (!(xs.front() > 0.0)) {
        throw UsageError("lambda range must be positive");
    }
    opts["range"] = {{"from", xs.front()}, {"to", xs.back()}, {"points", xs.size()}};
    Result r;
    r.columns = {"lambda",      "delay_us",     "delay_tau_us",   "delay_n_us",         "delay_n_approx_us",
                 "delay_approx_us", "efficiency", "efficiency_tau", "efficiency_n", "efficiency_n_approx",
                 "efficiency_approx", "efficiency_max"};
    if (o.with_sim) {
        r.columns.insert(r.columns.end(), kSimColumns.begin(), kSimColumns.end());
    }
    for (double lambda : xs) {
        const auto t = traffic(o, lambda);
        t.require_stable();
        const auto tw = p.wakeup_duration;
        json row = table_row(
            r.columns,
            {lambda, eee::mean_delay_closed_form(p, t),
             p.has_timer() ? json(eee::mean_delay_tau_policy(t, *p.timer_threshold, tw)) : json(nullptr),
             p.has_counter() ? json(eee::mean_delay_n_policy(p, t)) : json(nullptr),
             p.has_counter() ? json(eee::mean_delay_n_policy_approx(*p.counter_threshold, t, tw)) : json(nullptr),
             eee::mean_delay_approx(p, t), eee::power_efficiency(p, t),
             p.has_timer() ? json(eee::power_efficiency_tau_policy(p, t)) : json(nullptr),
             p.has_counter() ? json(eee::power_efficiency_n_policy(p, t)) : json(nullptr),
             p.has_counter() ? json(eee::power_efficiency_n_policy_approx(p, t)) : json(nullptr),
             eee::power_efficiency_approx(p, t), eee::efficiency_ceiling(p, t), nullptr, nullptr, nullptr,
             nullptr});
        if (o.with_sim) {
            add_sim_columns(o, p, t, row);
        }
        r.rows.push_back(row);
    }
    return r;
}

Result sweep_n(const Options& o, json& opts) {
    const double lambda = require_lambda(o);
    const auto base = protocol(o);
    const auto t = traffic(o, lambda);
    t.require_stable();
    const double from = o.from.value_or(1.0);
    const double to = o.to.value_or(200.0);
    if (from != std::floor(from) || to != std::floor(to) || from < 1.0) {
        throw UsageError("N range needs integers >= 1");
    }
    if (!(from <= to)) {
        throw UsageError("empty or inverted range: --from must not exceed --to");
    }
    if (to > static_cast<double>(eee::plan::kMaxCounter)) {
        throw UsageError("N range is bounded by 10^6");
    }
    opts["range"] = {{"from", static_cast<long>(from)}, {"to", static_cast<long>(to)}};
    Result r;
    r.columns = {"n", "tau_us", "delay_us", "efficiency", "delay_rule_us", "delay_curve_us", "efficiency_max"};
    if (o.with_sim) {
        r.columns.insert(r.columns.end(), kSimColumns.begin(), kSimColumns.end());
    }
    const auto rows = eee::plan::tradeoff_sweep(t, base, static_cast<long>(from), static_cast<long>(to));
    const double ceiling = eee::efficiency_ceiling(base, t);
    for (const auto& s : rows) {
        json row = table_row(r.columns, {s.counter, optional_json(s.tau), s.delay, s.efficiency, s.delay_rule,
                                         s.delay_curve, ceiling, nullptr, nullptr, nullptr, nullptr});
        const auto cfg = eee::plan::coupled_config(base, s.counter, lambda);
        // the simulator needs the timer to outlast Sleep; such rows keep empty sim cells
        if (o.with_sim && (!cfg.has_timer() || *cfg.timer_threshold > cfg.sleep_duration)) {
            add_sim_columns(o, cfg, t, row);
        }
        r.rows.push_back(row);
    }
    return r;
}

Result sweep_eta(const Options& o, json& opts) {
    const double lambda = require_lambda(o);
    const auto base = protocol(o);
    const auto t = traffic(o, lambda);
    t.require_stable();
    if (o.with_sim) {
        throw UsageError("--with-sim is not available for the efficiency sweep");
    }
    const double ceiling = eee::efficiency_ceiling(base, t);
    const auto xs = grid(o.from.value_or(0.0), o.to.value_or(0.999 * ceiling), o.points.value_or(50));
    opts["range"] = {{"from", xs.front()}, {"to", xs.back()}, {"points", xs.size()}};
    Result r;
    r.columns = {"efficiency", "efficiency_fraction", "delay_us", "delay_derivative_us"};
    for (double eta : xs) {
        r.rows.push_back(table_row(r.columns, {eta, eta / ceiling, eee::delay_of_efficiency(base, t, eta),
                                               eee::delay_of_efficiency_derivative(base, t, eta)}));
    }
    r.summary["efficiency_max"] = ceiling;
    return r;
}

json plan_json(const eee::plan::PlanResult& p) {
    return {{"counter_threshold", p.counter_threshold},
            {"timer_threshold_us", optional_json(p.timer_threshold)},
            {"policy", p.is_ftr() ? "ftr" : "tau_and_n"},
            {"budget_us", p.budget_us},
            {"predicted_delay_exact_us", p.predicted_delay_exact},
            {"predicted_delay_rule_us", p.predicted_delay_rule},
            {"predicted_efficiency", p.predicted_efficiency},
            {"efficiency_max", p.efficiency_ceiling},
            {"ftr_delay_us", p.ftr_delay},
            {"ftr_efficiency", p.ftr_efficiency},
            {"delay_multiplier", p.predicted_delay_exact / p.ftr_delay},
            {"efficiency_multiplier", p.predicted_efficiency / p.ftr_efficiency}};
}

Result plan(const Options& o, json& opts) {
    const double lambda = require_lambda(o);
    if (o.delay_budget.has_value() == o.delay_multiplier.has_value()) {
        throw UsageError("give exactly one of --delay-budget and --delay-multiplier");
    }
    const auto budget = o.delay_budget ? eee::plan::DelayBudget::absolute(*o.delay_budget)
                                       : eee::plan::DelayBudget::relative(*o.delay_multiplier);
    opts = {{"delay_budget_us", optional_json(o.delay_budget)},
            {"delay_multiplier", optional_json(o.delay_multiplier)},
            {"objective", o.objective}};
    const auto result = eee::plan::plan({traffic(o, lambda), budget, protocol(o), objective(o)});
    Result r;
    r.record = plan_json(result);
    return r;
}

Result validate_grid(const Options& o, json& opts) {
    const auto base = protocol(o);
    const double tau = base.timer_threshold.value_or(30.0);
    const long n = base.counter_threshold.value_or(11);
    const std::vector<double> lambdas = o.lambdas.empty() ? std::vector<double>{0.2, 1.0 / 3.0, 0.8} : o.lambdas;
    opts = {{"lambdas", lambdas}, {"tau_us", tau}, {"n", n}, {"frames", o.frames}, {"seed", o.seed},
            {"batches", o.batches}, {"warmup_cycles", o.warmup_cycles}};
    Result r;
    r.columns = {"lambda", "policy", "tau_us", "n", "analytic_delay_us", "sim_delay_us", "sim_delay_half_width_us",
                 "delay_in_ci", "analytic_efficiency", "sim_efficiency", "sim_efficiency_half_width",
                 "efficiency_in_ci", "cell_pass"};
    int passing = 0;
    for (double lambda : lambdas) {
        const auto t = traffic(o, lambda);
        t.require_stable();
        for (int kind = 0; kind < 3; ++kind) {
            auto p = base;
            p.timer_threshold = kind == 1 ? std::nullopt : std::optional<double>(tau);
            p.counter_threshold = kind == 0 ? std::nullopt : std::optional<long>(n);
            p.validate();
            const auto rep = eee::sim::run_simulation(sim_config(o, p, t));
            const double d = eee::mean_delay_closed_form(p, t);
            const double e = eee::power_efficiency(p, t);
            const bool din = rep.mean_delay.contains(d);
            const bool ein = rep.power_efficiency.contains(e);
            passing += din && ein ? 1 : 0;
            r.rows.push_back(table_row(
                r.columns, {lambda, std::string(eee::to_string(eee::policy_of(p))), optional_json(p.timer_threshold),
                            optional_json(p.counter_threshold), d, rep.mean_delay.value, rep.mean_delay.half_width,
                            din, e, rep.power_efficiency.value, rep.power_efficiency.half_width, ein, din && ein}));
        }
    }
    r.summary = {{"cells", r.rows.size()}, {"cells_passing", passing}};
    return r;
}

Result counterexample(const Options& o, json& opts) {
    const auto base = protocol(o);
    const double tau = base.timer_threshold.value_or(30.0);
    std::vector<double> lambdas = o.lambdas;
    if (lambdas.empty()) {
        lambdas = (o.from || o.to || o.points) ? grid(o.from.value_or(0.05), o.to.value_or(0.8), o.points.value_or(5))
                                               : std::vector<double>{0.05, 0.1, 0.2, 0.4, 0.8};
    }
    opts = {{"lambdas", lambdas}, {"tau_us", tau}, {"frames", o.frames}, {"seed", o.seed},
            {"batches", o.batches}, {"warmup_cycles", o.warmup_cycles}};
    Result r;
    r.columns = {"lambda",
                 "classical_delay_us",
                 "generalized_delay_us",
                 "sim_delay_us",
                 "sim_delay_half_width_us",
                 "classical_minus_sim_us",
                 "sim_below_classical",
                 "sim_ci_contains_generalized",
                 "pgf_mismatch_max"};
    bool all_below = true;
    for (double lambda : lambdas) {
        const auto t = traffic(o, lambda);
        t.require_stable();
        auto p = base;
        p.timer_threshold = tau;
        p.counter_threshold.reset();
        const auto law = eee::tau_policy_vacation_law(lambda, tau, p.wakeup_duration);
        const auto rep = eee::sim::run_simulation(sim_config(o, p, t));
        const double classical = law.classical_delay(t);
        const double generalized = law.generalized_delay(t);
        const bool below = rep.mean_delay.value < classical;
        all_below = all_below && below;
        r.rows.push_back(table_row(r.columns,
                                   {lambda, classical, generalized, rep.mean_delay.value, rep.mean_delay.half_width,
                                    classical - rep.mean_delay.value, below, rep.mean_delay.contains(generalized),
                                    law.max_pgf_mismatch()}));
    }
    r.summary = {{"all_below_classical", all_below}};
    return r;
}

Result table1(const Options& o, json& opts) {
    const auto base = protocol(o);
    const auto law = service_law(o);
    opts = {{"objective", o.objective}};
    Result r;
    r.columns = {"lambda",
                 "n",
                 "tau_us",
                 "delay_multiplier_printed",
                 "delay_multiplier",
                 "delay_relative_error",
                 "efficiency_multiplier_printed",
                 "efficiency_multiplier",
                 "efficiency_relative_error",
                 "planned_n",
                 "planned_tau_us"};
    const auto obj = objective(o);
    for (const auto& c : eee::plan::reproduce_table1(base, law)) {
        const eee::TrafficModel t{c.printed.lambda, law};
        const auto planned =
            eee::plan::plan({t, eee::plan::DelayBudget::relative(c.printed.delay_multiplier), base, obj});
        r.rows.push_back(table_row(r.columns, {c.printed.lambda, c.printed.counter, c.printed.tau,
                                               c.printed.delay_multiplier, c.delay_multiplier,
                                               c.delay_relative_error(), c.printed.efficiency_multiplier,
                                               c.efficiency_multiplier, c.efficiency_relative_error(),
                                               planned.counter_threshold, optional_json(planned.timer_threshold)}));
    }
    return r;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analytic model, simulator and parameter planner for burst-transmission EEE links"};
    app.set_config("--config", "", "key=value file; keys are the long flag names, flags on the command line win");
    app.require_subcommand(1);
    app.fallthrough();
    Options o;

    const std::string model = "Model";
    app.add_option("--lambda", o.lambda, "arrival rate, frames/us")->group(model);
    app.add_option("--tau", o.tau, "timer threshold, us, or 'inf'")->group(model);
    app.add_option("--n", o.n, "counter threshold, or 'inf'")->group(model);
    app.add_flag("--ftr", o.ftr, "frame transmission: wake on the first arrival (N = 1)")->group(model);
    app.add_option("--ts", o.ts, "Sleep duration, us")->capture_default_str()->group(model);
    app.add_option("--tw", o.tw, "Wakeup duration, us")->capture_default_str()->group(model);
    app.add_option("--phi-high", o.phi_high, "active power, W")->capture_default_str()->group(model);
    app.add_option("--phi-low", o.phi_low, "LPI power, W (default 0.1 * phi-high)")->group(model);
    app.add_option("--service", o.service, "service law: det, exp or file")
        ->check(CLI::IsMember({"det", "exp", "file"}))
        ->capture_default_str()
        ->group(model);
    app.add_option("--service-file", o.service_file, "CSV of 'value,probability' lines")->group(model);
    app.add_option("--xbar", o.xbar, "mean service time, us")->capture_default_str()->group(model);

    const std::string sim = "Simulation";
    app.add_option("--frames", o.frames, "post-warmup frame budget")->capture_default_str()->group(sim);
    app.add_option("--seed", o.seed, "RNG seed")->capture_default_str()->group(sim);
    app.add_option("--batches", o.batches, "batch count for confidence intervals")->capture_default_str()->group(sim);
    app.add_option("--warmup-cycles", o.warmup_cycles, "cycles discarded before measuring")
        ->capture_default_str()
        ->group(sim);
    app.add_option("--trace", o.trace, "per-frame CSV trace path (simulate)")->group(sim);

    const std::string ranges = "Sweeps";
    app.add_option("--sweep", o.sweep, "sweep variable: lambda, n or eta")
        ->check(CLI::IsMember({"lambda", "n", "eta"}))
        ->group(ranges);
    app.add_option("--from", o.from, "range start")->group(ranges);
    app.add_option("--to", o.to, "range end")->group(ranges);
    app.add_option("--points", o.points, "number of grid points")->group(ranges);
    app.add_flag("--with-sim", o.with_sim, "add simulated columns")->group(ranges);
    app.add_option("--lambdas", o.lambdas, "explicit arrival rates (validate, counterexample)")
        ->delimiter(',')
        ->group(ranges);

    const std::string planning = "Planning";
    app.add_option("--delay-budget", o.delay_budget, "mean delay requirement, us")->group(planning);
    app.add_option("--delay-multiplier", o.delay_multiplier, "requirement as a multiple of the FTR delay")
        ->group(planning);
    app.add_option("--objective", o.objective, "nearest: delay closest to the requirement; within: largest N under it")
        ->check(CLI::IsMember({"nearest", "within"}))
        ->capture_default_str()
        ->group(planning);

    const std::string output = "Output";
    app.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->group(output);
    app.add_option("--output", o.output, "output file (default stdout)")->group(output);

    struct Command {
        const char* name;
        const char* help;
        Result (*run)(const Options&, json&);
        const char* default_format;
    };
    const std::vector<Command> commands = {
        {"analyze", "closed-form vacation, efficiency and delay", analyze, "json"},
        {"simulate", "event-driven simulation with batch-means intervals", simulate, "json"},
        {"sweep", "tables over lambda, N (coupled timer) or efficiency", nullptr, "csv"},
        {"plan", "choose N and tau from a delay requirement", plan, "json"},
        {"validate", "simulation against analysis on a lambda x policy grid", validate_grid, "csv"},
        {"counterexample", "tau policy: classical P-K vs generalized formula vs simulation", counterexample, "csv"},
        {"table1", "published parameter-selection table, recomputed", table1, "csv"},
    };
    for (const auto& c : commands) {
        app.add_subcommand(c.name, c.help);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    const Command* cmd = nullptr;
    for (const auto& c : commands) {
        if (app.got_subcommand(c.name)) {
            cmd = &c;
        }
    }
    const std::vector<std::string> args(argv + 1, argv + argc);
    try {
        const std::string format = o.format.empty() ? cmd->default_format : o.format;
        json opts = json::object();
        Result result;
        if (std::string(cmd->name) == "sweep") {
            if (o.sweep.empty()) {
                throw UsageError("sweep needs --sweep lambda|n|eta");
            }
            opts["sweep"] = o.sweep;
            result = o.sweep == "lambda" ? sweep_lambda(o, opts) : o.sweep == "n" ? sweep_n(o, opts) : sweep_eta(o, opts);
            if (o.with_sim) {
                opts["simulation"] = {{"frames", o.frames}, {"seed", o.seed}, {"batches", o.batches},
                                      {"warmup_cycles", o.warmup_cycles}};
            }
        } else {
            result = cmd->run(o, opts);
        }
        emit(render(result, manifest(cmd->name, o, args, format, opts), format), o);
        if (std::string(cmd->name) == "counterexample" && !result.summary["all_below_classical"].get<bool>()) {
            throw CheckFailed("simulated delay did not stay below the classical formula at every rate");
        }
        return 0;
    } catch (const eee::StabilityError& e) {
        std::cerr << "error: unstable traffic: " << e.what() << '\n';
        return kExitStability;
    } catch (const eee::plan::InfeasiblePlan& e) {
        std::cerr << "error: infeasible plan: " << e.what() << " (floor " << e.floor_us() << " us)\n";
        return kExitInfeasible;
    } catch (const eee::StatisticalError& e) {
        std::cerr << "error: statistical setup: " << e.what() << '\n';
        return kExitStatistical;
    } catch (const CheckFailed& e) {
        std::cerr << "check failed: " << e.what() << '\n';
        return kExitCheckFailed;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const eee::ConfigError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const eee::DomainError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }
}
