#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bpme/model.hpp"
#include "bpme/rng.hpp"

namespace bpme {

/// Bpme freezes the population at 0; ZValued keeps applying Y -> Y - 1 + xi.
enum class ProcessMode { Bpme, ZValued };

struct TrajectoryStep {
    int state_after;
    int offspring;
    long long population_after;
};

/// Recorded trajectory with its seed, so any run can be reproduced exactly.
struct Trajectory {
    ProcessMode mode = ProcessMode::Bpme;
    TotalState init;
    std::vector<TrajectoryStep> steps;
    std::optional<long long> extinction_time;  // engaged iff terminated by extinction
    std::uint64_t seed = 0;

    long long final_population() const {
        return steps.empty() ? init.population : steps.back().population_after;
    }
    int final_state() const { return steps.empty() ? init.state : steps.back().state_after; }
};

struct StepOutcome {
    TotalState next;
    int offspring;
};

/// One update: the environment moves first, then the offspring count is drawn
/// from the NEW state's distribution. A Bpme step at population 0 only moves
/// the environment (the population is frozen and no offspring draw is consumed).
inline StepOutcome step(const BpmeModel& m, const TotalState& current, ProcessMode mode,
                        Xoshiro256PlusPlus& rng) {
    if (mode == ProcessMode::Bpme && current.population < 0)
        throw InvalidInitError("population must be nonnegative in Bpme mode");
    const int next_state = m.chain.sample_next(current.state, rng.next_double());
    if (mode == ProcessMode::Bpme && current.population == 0)
        return StepOutcome{TotalState{0, next_state}, 0};
    const int xi = m.offspring[static_cast<std::size_t>(next_state)].sample(rng.next_double());
    return StepOutcome{TotalState{current.population - 1 + xi, next_state}, xi};
}

/// Runs a full trajectory. Bpme mode stops early at extinction. Identical
/// (model, init, mode, t_max, seed) give bit-identical trajectories.
inline Trajectory run(const BpmeModel& m, const TotalState& init, ProcessMode mode,
                      long long t_max, std::uint64_t seed) {
    if (t_max < 0) throw ValidationError("t_max must be nonnegative");
    if (init.state < 0 || init.state >= m.size())
        throw InvalidInitError("initial state index out of range");
    if (mode == ProcessMode::Bpme && init.population < 1)
        throw InvalidInitError("Bpme mode requires initial population >= 1");

    Trajectory traj;
    traj.mode = mode;
    traj.init = init;
    traj.seed = seed;
    Xoshiro256PlusPlus rng(seed);
    TotalState cur = init;
    for (long long t = 1; t <= t_max; ++t) {
        const StepOutcome out = step(m, cur, mode, rng);
        cur = out.next;
        traj.steps.push_back({cur.state, out.offspring, cur.population});
        if (mode == ProcessMode::Bpme && cur.population == 0) {
            traj.extinction_time = t;
            break;
        }
    }
    return traj;
}

struct RunEndpoint {
    TotalState final_state;
    std::optional<long long> extinction_time;
};

/// Same recurrence and RNG consumption as run(), but streams the steps
/// instead of recording them; memory stays O(1).
inline RunEndpoint run_endpoint(const BpmeModel& m, const TotalState& init, ProcessMode mode,
                                long long t_max, std::uint64_t seed) {
    if (t_max < 0) throw ValidationError("t_max must be nonnegative");
    if (init.state < 0 || init.state >= m.size())
        throw InvalidInitError("initial state index out of range");
    if (mode == ProcessMode::Bpme && init.population < 1)
        throw InvalidInitError("Bpme mode requires initial population >= 1");
    Xoshiro256PlusPlus rng(seed);
    TotalState cur = init;
    for (long long t = 1; t <= t_max; ++t) {
        cur = step(m, cur, mode, rng).next;
        if (mode == ProcessMode::Bpme && cur.population == 0) return RunEndpoint{cur, t};
    }
    return RunEndpoint{cur, std::nullopt};
}

/// Net population changes and durations of completed excursions of the
/// environment chain between successive visits to an anchor state.
struct ExcursionStats {
    int anchor_state = 0;
    std::vector<long long> deltas;
    std::vector<long long> durations;
};

/// Decomposes a Z-valued trajectory at successive visits to `anchor`.
/// The incomplete final excursion is discarded; if the trajectory does not
/// start at the anchor, the partial segment before the first visit is too.
inline ExcursionStats excursions(const Trajectory& traj, int anchor) {
    if (traj.mode != ProcessMode::ZValued)
        throw WrongModeError("excursion decomposition applies to Z-valued trajectories");
    ExcursionStats stats;
    stats.anchor_state = anchor;
    bool have_prev = false;
    long long prev_t = 0;
    long long prev_y = 0;
    if (traj.init.state == anchor) {
        have_prev = true;
        prev_t = 0;
        prev_y = traj.init.population;
    }
    for (std::size_t k = 0; k < traj.steps.size(); ++k) {
        if (traj.steps[k].state_after != anchor) continue;
        const long long t = static_cast<long long>(k) + 1;
        const long long y = traj.steps[k].population_after;
        if (have_prev) {
            stats.deltas.push_back(y - prev_y);
            stats.durations.push_back(t - prev_t);
        }
        have_prev = true;
        prev_t = t;
        prev_y = y;
    }
    return stats;
}

/// Summary of an ensemble of independent trajectories.
struct EnsembleSummary {
    long long trajectories_run = 0;
    long long survivors_at_cap = 0;  // endpoint population >= 1 (alive-at-t_max proxy)
    std::vector<long long> endpoint_populations;
    std::uint64_t master_seed = 0;
    long long t_max = 0;
};

/// Embarrassingly parallel ensemble. Trajectory k always uses the stream
/// derived from (master_seed, k), and results are merged by index, so the
/// summary is bit-identical for any worker count.
inline EnsembleSummary monte_carlo(const BpmeModel& m, const TotalState& init, ProcessMode mode,
                                   long long t_max, long long N, std::uint64_t master_seed,
                                   int workers = 0) {
    if (N < 1) throw ValidationError("ensemble size must be >= 1");
    if (mode == ProcessMode::Bpme && init.population < 1)
        throw InvalidInitError("Bpme mode requires initial population >= 1");
    if (init.state < 0 || init.state >= m.size())
        throw InvalidInitError("initial state index out of range");
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (static_cast<long long>(workers) > N) workers = static_cast<int>(N);

    EnsembleSummary summary;
    summary.trajectories_run = N;
    summary.master_seed = master_seed;
    summary.t_max = t_max;
    summary.endpoint_populations.assign(static_cast<std::size_t>(N), 0);

    std::vector<long long> survivors_per_worker(static_cast<std::size_t>(workers), 0);
    auto work = [&](int w) {
        const long long lo = N * w / workers;
        const long long hi = N * (w + 1) / workers;
        long long survivors = 0;
        for (long long k = lo; k < hi; ++k) {
            const auto end = run_endpoint(m, init, mode, t_max,
                                          splitmix64_at(master_seed, static_cast<std::uint64_t>(k)));
            summary.endpoint_populations[static_cast<std::size_t>(k)] =
                end.final_state.population;
            if (end.final_state.population >= 1) ++survivors;
        }
        survivors_per_worker[static_cast<std::size_t>(w)] = survivors;
    };

    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    for (long long s : survivors_per_worker) summary.survivors_at_cap += s;
    return summary;
}

}  // namespace bpme
