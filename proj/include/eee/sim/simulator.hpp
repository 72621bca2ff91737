#pragma once

// Event-driven simulation of one direction of a BTR link: Poisson arrivals, FIFO
// service, and the Sleep -> LPI -> Wakeup vacation controlled by a timer and a
// counter armed at the first arrival of each vacation.

#include "eee/config.hpp"
#include "eee/count_distribution.hpp"
#include "eee/errors.hpp"
#include "eee/sim/batch_means.hpp"
#include "eee/sim/random.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <iomanip>
#include <ostream>
#include <queue>
#include <random>
#include <vector>

namespace eee::sim {

/// Simulation clock: integer picoseconds, so state durations add up exactly.
using Ticks = std::chrono::duration<std::int64_t, std::pico>;

inline Ticks to_ticks(double microseconds) {
    return Ticks(std::llround(microseconds * 1e6));
}

inline double to_microseconds(Ticks t) {
    return static_cast<double>(t.count()) * 1e-6;
}

struct SimConfig {
    ProtocolConfig protocol;
    TrafficModel traffic;
    std::int64_t frame_budget = 1'000'000;
    std::int64_t warmup_cycles = 100;
    std::uint64_t rng_seed = 1;
    int batch_count = 20;

    void validate() const {
        protocol.validate();
        traffic.require_stable();
        if (batch_count < 10) {
            throw StatisticalError("batch_count must be at least 10");
        }
        if (frame_budget < 10 * static_cast<std::int64_t>(batch_count)) {
            throw StatisticalError("frame_budget must be at least 10 * batch_count");
        }
        if (warmup_cycles < 0) {
            throw ConfigError("warmup_cycles must be non-negative");
        }
        if (protocol.has_timer() && !(to_ticks(*protocol.timer_threshold) > to_ticks(protocol.sleep_duration))) {
            throw ConfigError("simulation requires timer_threshold > sleep_duration");
        }
    }
};

enum class LinkState : std::uint8_t { Busy, Sleeping, LowPowerIdle, WakingUp };

enum class WakeupCause : std::uint8_t { Timer, Counter, SleepEndCounter };

struct WakeupCauseCounts {
    std::int64_t timer = 0;
    std::int64_t counter = 0;           // N-th arrival during LPI
    std::int64_t sleep_end_counter = 0; // N reached during Sleep, Wakeup at Sleep end

    std::int64_t total() const noexcept { return timer + counter + sleep_end_counter; }
    double timer_fraction() const noexcept {
        return total() == 0 ? 0.0 : static_cast<double>(timer) / static_cast<double>(total());
    }
    bool operator==(const WakeupCauseCounts&) const = default;
};

struct StateTimes {
    Ticks busy{0};
    Ticks sleeping{0};
    Ticks low_power_idle{0};
    Ticks waking_up{0};

    Ticks total() const noexcept { return busy + sleeping + low_power_idle + waking_up; }
    bool operator==(const StateTimes&) const = default;
};

struct SimReport {
    Estimate mean_delay;       // microseconds, arrival to departure
    Estimate power_efficiency; // (phi_h - mean power) / phi_h
    Estimate mean_vacation;    // microseconds
    CountDistribution empirical_h;
    /// vacation_counts[n]: post-warmup vacations that ended with n arrivals.
    std::vector<std::int64_t> vacation_counts;
    /// tagged_arrivals[n]: frames that arrived during a vacation ending with n arrivals.
    std::vector<std::int64_t> tagged_arrivals;
    std::int64_t cycles_observed = 0;
    std::int64_t frames_observed = 0;
    WakeupCauseCounts wakeup_causes;
    int batches = 0;

    // Whole-run bookkeeping, warmup included.
    std::int64_t frames_generated = 0;
    std::int64_t frames_departed = 0;
    std::int64_t frames_queued_at_stop = 0;
    std::int64_t cycles_total = 0;
    StateTimes state_times;
    Ticks simulated_time{0};

    bool operator==(const SimReport&) const = default;
};

namespace detail {

class BtrSimulator {
public:
    BtrSimulator(const SimConfig& cfg, std::ostream* trace)
        : cfg_(cfg),
          trace_(trace),
          arrivals_rng_(make_stream(cfg.rng_seed, Stream::Arrivals)),
          service_rng_(make_stream(cfg.rng_seed, Stream::Service)),
          interarrival_(cfg.traffic.arrival_rate),
          service_(cfg.traffic.service),
          sleep_(to_ticks(cfg.protocol.sleep_duration)),
          wakeup_(to_ticks(cfg.protocol.wakeup_duration)),
          timer_(cfg.protocol.has_timer() ? to_ticks(*cfg.protocol.timer_threshold) : Ticks::max()),
          counter_(cfg.protocol.has_counter() ? *cfg.protocol.counter_threshold : 0),
          frames_per_batch_((cfg.frame_budget + cfg.batch_count - 1) / cfg.batch_count) {}

    SimReport run() {
        if (trace_ != nullptr) {
            *trace_ << "arrival_time,service_start,departure,cycle_index\n" << std::fixed << std::setprecision(6);
        }
        schedule_arrival(Ticks{0});
        start_vacation(Ticks{0});
        while (!stopped_) {
            const Event ev = events_.top();
            events_.pop();
            switch (ev.kind) {
            case EventKind::ServiceCompletion: on_service_completion(ev.time); break;
            case EventKind::SleepEnd: on_sleep_end(ev.time, ev.vacation); break;
            case EventKind::TimerExpiry: on_timer(ev.time, ev.vacation); break;
            case EventKind::WakeupEnd: on_wakeup_end(ev.time, ev.vacation); break;
            case EventKind::Arrival: on_arrival(ev.time); break;
            }
        }
        return finish();
    }

private:
    // Order of simultaneous events.
    enum class EventKind : std::uint8_t { ServiceCompletion, SleepEnd, TimerExpiry, WakeupEnd, Arrival };

    struct Event {
        Ticks time;
        EventKind kind;
        std::uint64_t seq;
        std::uint64_t vacation;
    };

    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.time != b.time) return a.time > b.time;
            if (a.kind != b.kind) return a.kind > b.kind;
            return a.seq > b.seq;
        }
    };

    struct Frame {
        Ticks arrival;
        Ticks service;
        Ticks service_start{0};
        std::int64_t cycle;
    };

    struct CycleTally {
        Ticks start{0};
        Ticks vacation_start{0};
        Ticks vacation{0};
        Ticks low_power_idle{0};
        Ticks delay_sum{0};
        std::int64_t frames = 0;
        std::int64_t vacation_arrivals = 0;
        WakeupCause cause = WakeupCause::Timer;
    };

    struct BatchTally {
        double delay_us = 0.0;
        std::int64_t frames = 0;
        double lpi_us = 0.0;
        double cycle_us = 0.0;
        double vacation_us = 0.0;
        std::int64_t cycles = 0;
    };

    void push(Ticks t, EventKind kind) { events_.push({t, kind, seq_++, vacation_index_}); }

    void transition(LinkState next, Ticks now) {
        const Ticks spent = now - state_since_;
        switch (state_) {
        case LinkState::Busy: times_.busy += spent; break;
        case LinkState::Sleeping: times_.sleeping += spent; break;
        case LinkState::LowPowerIdle:
            times_.low_power_idle += spent;
            cycle_.low_power_idle += spent;
            break;
        case LinkState::WakingUp: times_.waking_up += spent; break;
        }
        state_ = next;
        state_since_ = now;
    }

    void schedule_arrival(Ticks now) {
        const Ticks gap = to_ticks(interarrival_(arrivals_rng_));
        push(now + gap, EventKind::Arrival);
    }

    void start_vacation(Ticks now) {
        transition(LinkState::Sleeping, now);
        ++vacation_index_;
        cycle_ = CycleTally{};
        cycle_.start = now;
        cycle_.vacation_start = now;
        wake_pending_ = false;
        push(now + sleep_, EventKind::SleepEnd);
    }

    void start_wakeup(Ticks now, WakeupCause cause) {
        transition(LinkState::WakingUp, now);
        cycle_.cause = cause;
        push(now + wakeup_, EventKind::WakeupEnd);
    }

    void on_arrival(Ticks now) {
        ++frames_generated_;
        queue_.push_back({now, to_ticks(service_(service_rng_)), Ticks{0}, cycle_index_});
        schedule_arrival(now);

        if (state_ == LinkState::Busy) {
            return;
        }
        ++cycle_.vacation_arrivals;
        if (state_ == LinkState::WakingUp) {
            return;
        }
        if (cycle_.vacation_arrivals == 1 && cfg_.protocol.has_timer()) {
            const Ticks deadline = now + timer_;
            if (deadline <= cycle_.vacation_start + sleep_) {
                throw ConsistencyError("timer would expire inside the Sleep period");
            }
            push(deadline, EventKind::TimerExpiry);
        }
        if (counter_ > 0 && cycle_.vacation_arrivals >= counter_) {
            if (state_ == LinkState::Sleeping) {
                wake_pending_ = true;
            } else {
                start_wakeup(now, WakeupCause::Counter);
            }
        }
    }

    void on_sleep_end(Ticks now, std::uint64_t vacation) {
        if (vacation != vacation_index_ || state_ != LinkState::Sleeping) {
            throw ConsistencyError("Sleep end outside its own Sleep period");
        }
        if (wake_pending_) {
            start_wakeup(now, WakeupCause::SleepEndCounter);
        } else {
            transition(LinkState::LowPowerIdle, now);
        }
    }

    void on_timer(Ticks now, std::uint64_t vacation) {
        if (vacation != vacation_index_) {
            return; // armed in an earlier vacation
        }
        if (state_ == LinkState::Sleeping) {
            throw ConsistencyError("timer expired during Sleep");
        }
        if (state_ == LinkState::LowPowerIdle) {
            start_wakeup(now, WakeupCause::Timer);
        }
        // WakingUp/Busy: counter fired first.
    }

    void on_wakeup_end(Ticks now, std::uint64_t vacation) {
        if (vacation != vacation_index_ || state_ != LinkState::WakingUp) {
            throw ConsistencyError("Wakeup end outside its own Wakeup period");
        }
        transition(LinkState::Busy, now);
        cycle_.vacation = now - cycle_.vacation_start;
        if (cycle_.vacation_arrivals < 1 || static_cast<std::int64_t>(queue_.size()) != cycle_.vacation_arrivals) {
            throw ConsistencyError("busy period must start with exactly the vacation's arrivals queued");
        }
        start_service(now);
    }

    void start_service(Ticks now) {
        Frame& f = queue_.front();
        f.service_start = now;
        push(now + f.service, EventKind::ServiceCompletion);
    }

    void on_service_completion(Ticks now) {
        const Frame f = queue_.front();
        queue_.pop_front();
        ++frames_departed_;
        cycle_.delay_sum += now - f.arrival;
        ++cycle_.frames;
        if (trace_ != nullptr) {
            *trace_ << to_microseconds(f.arrival) << ',' << to_microseconds(f.service_start) << ','
                    << to_microseconds(now) << ',' << f.cycle << '\n';
        }
        if (!queue_.empty()) {
            start_service(now);
            return;
        }
        end_cycle(now);
        if (stopped_) {
            transition(LinkState::Busy, now);
            end_time_ = now;
        } else {
            start_vacation(now);
        }
    }

    void end_cycle(Ticks now) {
        const std::int64_t index = cycle_index_++;
        if (index < cfg_.warmup_cycles) {
            return;
        }
        const auto n = static_cast<std::size_t>(cycle_.vacation_arrivals);
        if (vacation_counts_.size() <= n) {
            vacation_counts_.resize(n + 1, 0);
            tagged_arrivals_.resize(n + 1, 0);
        }
        ++vacation_counts_[n];
        tagged_arrivals_[n] += cycle_.vacation_arrivals;
        switch (cycle_.cause) {
        case WakeupCause::Timer: ++causes_.timer; break;
        case WakeupCause::Counter: ++causes_.counter; break;
        case WakeupCause::SleepEndCounter: ++causes_.sleep_end_counter; break;
        }
        ++cycles_observed_;
        frames_observed_ += cycle_.frames;

        batch_.delay_us += to_microseconds(cycle_.delay_sum);
        batch_.frames += cycle_.frames;
        batch_.lpi_us += to_microseconds(cycle_.low_power_idle);
        batch_.cycle_us += to_microseconds(now - cycle_.start);
        batch_.vacation_us += to_microseconds(cycle_.vacation);
        ++batch_.cycles;
        if (batch_.frames >= frames_per_batch_) {
            close_batch();
        }
    }

    void close_batch() {
        const double high = cfg_.protocol.power_high;
        const double low = cfg_.protocol.power_low;
        delay_.add_batch(batch_.delay_us, static_cast<double>(batch_.frames));
        efficiency_.add_batch((high - low) * batch_.lpi_us, high * batch_.cycle_us);
        vacation_.add_batch(batch_.vacation_us, static_cast<double>(batch_.cycles));
        batch_ = BatchTally{};
        if (static_cast<int>(delay_.size()) == cfg_.batch_count) {
            stopped_ = true;
        }
    }

    SimReport finish() {
        SimReport r;
        r.mean_delay = delay_.estimate();
        r.power_efficiency = efficiency_.estimate();
        r.mean_vacation = vacation_.estimate();
        std::vector<double> freq(vacation_counts_.size(), 0.0);
        for (std::size_t n = 0; n < freq.size(); ++n) {
            freq[n] = static_cast<double>(vacation_counts_[n]) / static_cast<double>(cycles_observed_);
        }
        r.empirical_h = CountDistribution::finite(std::move(freq));
        r.vacation_counts = vacation_counts_;
        r.tagged_arrivals = tagged_arrivals_;
        r.cycles_observed = cycles_observed_;
        r.frames_observed = frames_observed_;
        r.wakeup_causes = causes_;
        r.batches = static_cast<int>(delay_.size());
        r.frames_generated = frames_generated_;
        r.frames_departed = frames_departed_;
        r.frames_queued_at_stop = static_cast<std::int64_t>(queue_.size());
        r.cycles_total = cycle_index_;
        r.state_times = times_;
        r.simulated_time = end_time_;
        return r;
    }

    SimConfig cfg_;
    std::ostream* trace_;
    std::mt19937_64 arrivals_rng_;
    std::mt19937_64 service_rng_;
    std::exponential_distribution<double> interarrival_;
    ServiceSampler service_;
    Ticks sleep_;
    Ticks wakeup_;
    Ticks timer_;
    long counter_;
    std::int64_t frames_per_batch_;

    std::priority_queue<Event, std::vector<Event>, Later> events_;
    std::uint64_t seq_ = 0;
    std::deque<Frame> queue_;
    LinkState state_ = LinkState::Busy;
    Ticks state_since_{0};
    std::uint64_t vacation_index_ = 0;
    bool wake_pending_ = false;
    bool stopped_ = false;
    Ticks end_time_{0};

    CycleTally cycle_;
    std::int64_t cycle_index_ = 0;
    BatchTally batch_;
    RatioBatches delay_;
    RatioBatches efficiency_;
    RatioBatches vacation_;

    StateTimes times_;
    WakeupCauseCounts causes_;
    std::vector<std::int64_t> vacation_counts_;
    std::vector<std::int64_t> tagged_arrivals_;
    std::int64_t cycles_observed_ = 0;
    std::int64_t frames_observed_ = 0;
    std::int64_t frames_generated_ = 0;
    std::int64_t frames_departed_ = 0;
};

} // namespace detail

/// Runs one replication. Equal configs (seed included) give equal reports.
/// `trace`, when given, receives one CSV line per departed frame.
inline SimReport run_simulation(const SimConfig& cfg, std::ostream* trace = nullptr) {
    cfg.validate();
    return detail::BtrSimulator(cfg, trace).run();
}

inline constexpr std::int64_t kMinCyclesForCounts = 10'000;

/// Observed distribution of arrivals per vacation.
inline CountDistribution empirical_vacation_counts(const SimReport& report) {
    if (report.cycles_observed < kMinCyclesForCounts) {
        throw StatisticalError("need at least 10^4 observed cycles for vacation count frequencies");
    }
    return report.empirical_h;
}

/// P_n: fraction of vacation-arriving frames whose vacation ended with n arrivals.
inline CountDistribution empirical_arrival_tagged_counts(const SimReport& report) {
    if (report.cycles_observed < kMinCyclesForCounts) {
        throw StatisticalError("need at least 10^4 observed cycles for vacation count frequencies");
    }
    double total = 0.0;
    for (auto c : report.tagged_arrivals) {
        total += static_cast<double>(c);
    }
    std::vector<double> freq(report.tagged_arrivals.size(), 0.0);
    for (std::size_t n = 0; n < freq.size(); ++n) {
        freq[n] = static_cast<double>(report.tagged_arrivals[n]) / total;
    }
    return CountDistribution::finite(std::move(freq));
}

} // namespace eee::sim
