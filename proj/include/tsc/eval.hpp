#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "tsc/dqn.hpp"
#include "tsc/policies.hpp"
#include "tsc/rng.hpp"
#include "tsc/traffic.hpp"

namespace tsc {

// Per-step snapshot of a linear-topology rollout; enough to recompute
// departures (pre-step phases + queues) for greenwave analysis.
struct TrajectoryStep {
    long step = 0;
    std::vector<int> phases;                  // pre-step phases
    std::vector<std::array<int, 4>> queues;   // pre-step queues
    std::vector<int> actions;
    long post_cost = 0;
};

using Trajectory = std::vector<TrajectoryStep>;

struct EvalSummary {
    double mean_discounted_cost = 0.0;
    double mean_total_queue = 0.0;
    // Fraction of slots each intersection spent in each phase.
    std::vector<std::array<double, 4>> phase_occupancy;
    int seeds = 0;
};

// Paired-seed fairness: the arrival stream is seeded independently of the
// policy's own randomness, so different policies replay identical arrivals.
inline std::uint64_t arrival_stream_seed(std::uint64_t eval_seed) {
    return eval_seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL;
}

inline std::uint64_t policy_stream_seed(std::uint64_t eval_seed) {
    return eval_seed * 0xd6e8feb86659fd93ULL + 17;
}

// Rolls a frozen policy on the linear environment for `horizon` slots,
// recording the trajectory when `trajectory` is non-null.
inline double rollout_linear(const LinearConfig& cfg, RolloutPolicy& policy, std::uint64_t eval_seed,
                             long horizon, double gamma, double* mean_queue = nullptr,
                             Trajectory* trajectory = nullptr,
                             std::vector<std::array<double, 4>>* occupancy = nullptr) {
    if (horizon <= 0) throw std::invalid_argument("horizon must be positive");
    LinearEnvAdapter env(cfg, HeadMode::Factored);
    Rng arrivals(arrival_stream_seed(eval_seed));
    Rng prng(policy_stream_seed(eval_seed));
    env.reset();
    policy.reset();

    double discounted = 0.0;
    double discount = 1.0;
    double queue_sum = 0.0;
    std::vector<std::array<double, 4>> occ(static_cast<std::size_t>(cfg.n_intersections), {0, 0, 0, 0});

    for (long t = 0; t < horizon; ++t) {
        TrajectoryStep snap;
        if (trajectory) {
            snap.step = t;
            snap.phases = env.env().state().phases;
            snap.queues = env.env().state().queues;
        }
        for (int n = 0; n < cfg.n_intersections; ++n)
            occ[static_cast<std::size_t>(n)][static_cast<std::size_t>(
                env.env().state().phases[static_cast<std::size_t>(n)])] += 1.0;

        std::vector<int> a = policy.act(env.encode(), prng);
        double cost = env.step(a, arrivals);
        discounted += discount * cost;
        discount *= gamma;
        queue_sum += static_cast<double>(env.env().vehicles_queued());

        if (trajectory) {
            snap.actions = a;
            snap.post_cost = static_cast<long>(cost);
            trajectory->push_back(std::move(snap));
        }
    }

    if (mean_queue) *mean_queue = queue_sum / static_cast<double>(horizon);
    if (occupancy) {
        for (auto& row : occ)
            for (auto& c : row) c /= static_cast<double>(horizon);
        *occupancy = std::move(occ);
    }
    return discounted;
}

inline double rollout_single(ArrivalModel arrivals_model, RolloutPolicy& policy,
                             std::uint64_t eval_seed, long horizon, double gamma,
                             double* mean_queue = nullptr) {
    if (horizon <= 0) throw std::invalid_argument("horizon must be positive");
    SingleEnvAdapter env(arrivals_model);
    Rng arrivals(arrival_stream_seed(eval_seed));
    Rng prng(policy_stream_seed(eval_seed));
    env.reset();
    policy.reset();

    double discounted = 0.0;
    double discount = 1.0;
    double queue_sum = 0.0;
    for (long t = 0; t < horizon; ++t) {
        std::vector<int> a = policy.act(env.encode(), prng);
        double cost = env.step(a, arrivals);
        discounted += discount * cost;
        discount *= gamma;
        queue_sum += env.env().state().x1 + env.env().state().x2;
    }
    if (mean_queue) *mean_queue = queue_sum / static_cast<double>(horizon);
    return discounted;
}

inline EvalSummary evaluate_linear(const LinearConfig& cfg, RolloutPolicy& policy,
                                   const std::vector<std::uint64_t>& seeds, long horizon,
                                   double gamma) {
    EvalSummary summary;
    summary.phase_occupancy.assign(static_cast<std::size_t>(cfg.n_intersections), {0, 0, 0, 0});
    for (std::uint64_t seed : seeds) {
        double mq = 0.0;
        std::vector<std::array<double, 4>> occ;
        summary.mean_discounted_cost += rollout_linear(cfg, policy, seed, horizon, gamma, &mq, nullptr, &occ);
        summary.mean_total_queue += mq;
        for (std::size_t n = 0; n < occ.size(); ++n)
            for (std::size_t p = 0; p < 4; ++p) summary.phase_occupancy[n][p] += occ[n][p];
    }
    double k = static_cast<double>(seeds.size());
    summary.mean_discounted_cost /= k;
    summary.mean_total_queue /= k;
    for (auto& row : summary.phase_occupancy)
        for (auto& c : row) c /= k;
    summary.seeds = static_cast<int>(seeds.size());
    return summary;
}

}  // namespace tsc
