#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tsc/rng.hpp"

namespace tsc {

// Traffic-light configuration. Only the two green phases allow departures;
// the cycle is strictly 0 -> 1 -> 2 -> 3 -> 0 under Switch.
//   0: green for direction 1 (artery east/west at an intersection)
//   1: yellow for direction 1
//   2: green for direction 2 (cross street)
//   3: yellow for direction 2
using LightPhase = int;

enum class Action : int { Continue = 0, Switch = 1 };

inline LightPhase phase_step(LightPhase y, Action a) {
    return (y + static_cast<int>(a)) % 4;
}

struct SingleState {
    int x1 = 0;
    int x2 = 0;
    LightPhase y = 0;

    bool operator==(const SingleState&) const = default;
};

// Bernoulli arrival probabilities. p1 drives the artery end-point flows
// (both flows of the single intersection), p2 the cross streets.
struct ArrivalModel {
    double p1 = 0.25;
    double p2 = 0.125;
};

// Departures for the single intersection, evaluated at the pre-step phase.
// At most one vehicle crosses per slot, and only during a green phase.
inline std::pair<int, int> departures_single(const SingleState& s) {
    int d1 = (s.y == 0) ? std::min(1, s.x1) : 0;
    int d2 = (s.y == 2) ? std::min(1, s.x2) : 0;
    return {d1, d2};
}

inline int cost_single(int x1, int x2) { return x1 * x1 + x2 * x2; }

// One slot of the single-intersection dynamics: serve at the pre-step phase,
// add arrivals, then advance the phase by the action. queue_cap, when set,
// drops arrivals that would exceed the cap and counts them in overflow.
inline SingleState step_single(const SingleState& s, Action a, int c1, int c2,
                               std::optional<int> queue_cap = std::nullopt,
                               long* overflow = nullptr) {
    auto [d1, d2] = departures_single(s);
    int x1 = s.x1 + c1 - d1;
    int x2 = s.x2 + c2 - d2;
    if (queue_cap) {
        if (x1 > *queue_cap) {
            if (overflow) *overflow += x1 - *queue_cap;
            x1 = *queue_cap;
        }
        if (x2 > *queue_cap) {
            if (overflow) *overflow += x2 - *queue_cap;
            x2 = *queue_cap;
        }
    }
    return {x1, x2, phase_step(s.y, a)};
}

// Stateful wrapper used by training/evaluation rollouts.
class SingleEnv {
public:
    SingleEnv(ArrivalModel arrivals, std::optional<int> queue_cap = std::nullopt)
        : arrivals_(arrivals), cap_(queue_cap) {}

    void reset() { state_ = SingleState{}; overflow_ = 0; }

    // Samples arrivals from `rng`, applies one slot, returns the post-step
    // congestion cost x1'^2 + x2'^2 (reward is its negation).
    int step(Action a, Rng& rng) {
        int c1 = rng.bernoulli(arrivals_.p1) ? 1 : 0;
        int c2 = rng.bernoulli(arrivals_.p1) ? 1 : 0;
        state_ = step_single(state_, a, c1, c2, cap_, &overflow_);
        return cost_single(state_.x1, state_.x2);
    }

    const SingleState& state() const { return state_; }
    long overflow() const { return overflow_; }

private:
    ArrivalModel arrivals_;
    std::optional<int> cap_;
    SingleState state_{};
    long overflow_ = 0;
};

struct LinearConfig {
    int n_intersections = 4;
    int travel_delay = 1;  // u, slots between adjacent intersections
    ArrivalModel arrivals{};
    std::optional<int> queue_cap{};
};

// Fixed-length delay line holding 0/1 departure counts in transit between
// adjacent intersections.
struct DelayPipe {
    std::vector<int> slots;
    std::size_t head = 0;

    explicit DelayPipe(int length = 1) : slots(static_cast<std::size_t>(length), 0) {}

    // Pops the vehicle arriving this slot and pushes this slot's departure.
    int exchange(int departing) {
        int arriving = slots[head];
        slots[head] = departing;
        head = (head + 1) % slots.size();
        return arriving;
    }

    int in_transit() const {
        int total = 0;
        for (int v : slots) total += v;
        return total;
    }
};

// Directions per intersection: 1 = artery eastbound, 3 = artery westbound,
// 2 and 4 = the two cross-street flows. Phase 0 serves {1,3}, phase 2 {2,4}.
struct LinearState {
    std::vector<std::array<int, 4>> queues;  // queues[n][i-1] = X_{n,i}
    std::vector<LightPhase> phases;
    std::vector<DelayPipe> east_pipes;  // east_pipes[n]: n -> n+1 (direction 1)
    std::vector<DelayPipe> west_pipes;  // west_pipes[n]: n+1 -> n (direction 3)
};

struct LinearArrivals {
    int c11 = 0;               // external eastbound at intersection 1
    int cN3 = 0;               // external westbound at intersection N
    std::vector<int> cross2;   // C_{n2} per intersection
    std::vector<int> cross4;   // C_{n4} per intersection
};

class LinearEnv {
public:
    explicit LinearEnv(const LinearConfig& cfg) : cfg_(cfg) {
        if (cfg.n_intersections < 1) throw std::invalid_argument("n_intersections must be >= 1");
        if (cfg.travel_delay < 1) throw std::invalid_argument("travel_delay must be >= 1");
        reset();
    }

    void reset() {
        int n = cfg_.n_intersections;
        state_.queues.assign(static_cast<std::size_t>(n), {0, 0, 0, 0});
        state_.phases.assign(static_cast<std::size_t>(n), 0);
        state_.east_pipes.assign(static_cast<std::size_t>(n - 1), DelayPipe(cfg_.travel_delay));
        state_.west_pipes.assign(static_cast<std::size_t>(n - 1), DelayPipe(cfg_.travel_delay));
        total_arrived_ = 0;
        total_exited_ = 0;
        overflow_ = 0;
    }

    LinearArrivals sample_arrivals(Rng& rng) const {
        int n = cfg_.n_intersections;
        LinearArrivals a;
        a.c11 = rng.bernoulli(cfg_.arrivals.p1) ? 1 : 0;
        a.cN3 = rng.bernoulli(cfg_.arrivals.p1) ? 1 : 0;
        a.cross2.resize(static_cast<std::size_t>(n));
        a.cross4.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            a.cross2[static_cast<std::size_t>(i)] = rng.bernoulli(cfg_.arrivals.p2) ? 1 : 0;
            a.cross4[static_cast<std::size_t>(i)] = rng.bernoulli(cfg_.arrivals.p2) ? 1 : 0;
        }
        return a;
    }

    // One slot for all intersections. Departures use the pre-step phases,
    // artery departures enter the delay pipes, pipe heads feed this slot's
    // internal arrivals, cross-street and boundary departures exit the
    // network. Returns the post-step congestion cost sum X'^2.
    long step(const std::vector<Action>& actions, const LinearArrivals& ext) {
        const int n = cfg_.n_intersections;
        if (static_cast<int>(actions.size()) != n)
            throw std::invalid_argument("action vector length must equal n_intersections");

        std::vector<std::array<int, 4>> dep(static_cast<std::size_t>(n), {0, 0, 0, 0});
        for (int k = 0; k < n; ++k) {
            auto& q = state_.queues[static_cast<std::size_t>(k)];
            LightPhase y = state_.phases[static_cast<std::size_t>(k)];
            if (y == 0) {
                dep[static_cast<std::size_t>(k)][0] = std::min(1, q[0]);
                dep[static_cast<std::size_t>(k)][2] = std::min(1, q[2]);
            } else if (y == 2) {
                dep[static_cast<std::size_t>(k)][1] = std::min(1, q[1]);
                dep[static_cast<std::size_t>(k)][3] = std::min(1, q[3]);
            }
        }

        // Internal arrivals emerge from the pipe heads as this slot's
        // departures are pushed onto the tails.
        std::vector<int> arr1(static_cast<std::size_t>(n), 0);
        std::vector<int> arr3(static_cast<std::size_t>(n), 0);
        arr1[0] = ext.c11;
        arr3[static_cast<std::size_t>(n - 1)] = ext.cN3;
        for (int k = 0; k < n - 1; ++k) {
            arr1[static_cast<std::size_t>(k + 1)] =
                state_.east_pipes[static_cast<std::size_t>(k)].exchange(dep[static_cast<std::size_t>(k)][0]);
            arr3[static_cast<std::size_t>(k)] =
                state_.west_pipes[static_cast<std::size_t>(k)].exchange(dep[static_cast<std::size_t>(k + 1)][2]);
        }

        total_arrived_ += ext.c11 + ext.cN3;
        // Eastbound out of intersection N, westbound out of intersection 1.
        total_exited_ += dep[static_cast<std::size_t>(n - 1)][0] + dep[0][2];

        long cost = 0;
        for (int k = 0; k < n; ++k) {
            auto& q = state_.queues[static_cast<std::size_t>(k)];
            int c2 = ext.cross2[static_cast<std::size_t>(k)];
            int c4 = ext.cross4[static_cast<std::size_t>(k)];
            total_arrived_ += c2 + c4;
            // Cross-street vehicles leave the network after crossing.
            total_exited_ += dep[static_cast<std::size_t>(k)][1] + dep[static_cast<std::size_t>(k)][3];

            int next[4] = {
                q[0] + arr1[static_cast<std::size_t>(k)] - dep[static_cast<std::size_t>(k)][0],
                q[1] + c2 - dep[static_cast<std::size_t>(k)][1],
                q[2] + arr3[static_cast<std::size_t>(k)] - dep[static_cast<std::size_t>(k)][2],
                q[3] + c4 - dep[static_cast<std::size_t>(k)][3],
            };
            for (int i = 0; i < 4; ++i) {
                if (cfg_.queue_cap && next[i] > *cfg_.queue_cap) {
                    overflow_ += next[i] - *cfg_.queue_cap;
                    total_exited_ += next[i] - *cfg_.queue_cap;  // dropped
                    next[i] = *cfg_.queue_cap;
                }
                q[i] = next[i];
                cost += static_cast<long>(next[i]) * next[i];
            }
            state_.phases[static_cast<std::size_t>(k)] =
                phase_step(state_.phases[static_cast<std::size_t>(k)], actions[static_cast<std::size_t>(k)]);
        }
        return cost;
    }

    long step(const std::vector<Action>& actions, Rng& arrival_rng) {
        return step(actions, sample_arrivals(arrival_rng));
    }

    const LinearState& state() const { return state_; }
    LinearState& mutable_state() { return state_; }
    const LinearConfig& config() const { return cfg_; }

    long vehicles_queued() const {
        long total = 0;
        for (const auto& q : state_.queues)
            for (int v : q) total += v;
        return total;
    }

    long vehicles_in_transit() const {
        long total = 0;
        for (const auto& p : state_.east_pipes) total += p.in_transit();
        for (const auto& p : state_.west_pipes) total += p.in_transit();
        return total;
    }

    long total_arrived() const { return total_arrived_; }
    long total_exited() const { return total_exited_; }
    long overflow() const { return overflow_; }

private:
    LinearConfig cfg_;
    LinearState state_;
    long total_arrived_ = 0;
    long total_exited_ = 0;
    long overflow_ = 0;
};

inline long cost_linear(const LinearState& s) {
    long total = 0;
    for (const auto& q : s.queues)
        for (int v : q) total += static_cast<long>(v) * v;
    return total;
}

}  // namespace tsc
