#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "tsc/dqn.hpp"
#include "tsc/rng.hpp"

namespace tsc {

// A rollout policy maps the encoded observation to per-head action indices.
// Stateful baselines (fixed cycles) keep their own clocks; reset() is called
// once per rollout.
class RolloutPolicy {
public:
    virtual ~RolloutPolicy() = default;
    virtual void reset() {}
    virtual std::vector<int> act(const std::vector<double>& obs, Rng& policy_rng) = 0;
};

class GreedyDqnPolicy : public RolloutPolicy {
public:
    explicit GreedyDqnPolicy(const DqnAgent& agent) : agent_(agent) {}
    std::vector<int> act(const std::vector<double>& obs, Rng&) override {
        return agent_.greedy_action(obs);
    }

private:
    const DqnAgent& agent_;
};

class UniformRandomPolicy : public RolloutPolicy {
public:
    explicit UniformRandomPolicy(ActionHead head) : head_(head) {}
    std::vector<int> act(const std::vector<double>&, Rng& rng) override {
        std::vector<int> a(static_cast<std::size_t>(head_.heads));
        for (auto& ai : a) ai = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(head_.width)));
        return a;
    }

private:
    ActionHead head_;
};

class AlwaysContinuePolicy : public RolloutPolicy {
public:
    explicit AlwaysContinuePolicy(ActionHead head) : head_(head) {}
    std::vector<int> act(const std::vector<double>&, Rng&) override {
        return std::vector<int>(static_cast<std::size_t>(head_.heads), 0);
    }

private:
    ActionHead head_;
};

// Preprogrammed cycle: hold phase 0 for g slots, phase 1 for 1 slot, phase 2
// for g slots, phase 3 for 1 slot, repeat; all intersections in lockstep.
// Only meaningful with factored heads (one binary action per intersection).
class FixedCyclePolicy : public RolloutPolicy {
public:
    FixedCyclePolicy(ActionHead head, int green_duration) : head_(head), green_(green_duration) {
        if (head.width != 2) throw std::invalid_argument("fixed cycle needs binary heads");
        if (green_duration < 1) throw std::invalid_argument("green duration must be >= 1");
    }

    void reset() override { pos_ = 0; }

    std::vector<int> act(const std::vector<double>&, Rng&) override {
        // Cycle of length 2g+2 starting at phase 0; Switch on the last slot
        // of each dwell.
        int cycle = 2 * green_ + 2;
        int p = pos_ % cycle;
        int action;
        if (p < green_) {
            action = (p == green_ - 1) ? 1 : 0;     // phase 0 dwell
        } else if (p == green_) {
            action = 1;                              // phase 1, one slot
        } else if (p < 2 * green_ + 1) {
            action = (p == 2 * green_) ? 1 : 0;      // phase 2 dwell
        } else {
            action = 1;                              // phase 3, one slot
        }
        ++pos_;
        return std::vector<int>(static_cast<std::size_t>(head_.heads), action);
    }

private:
    ActionHead head_;
    int green_;
    long pos_ = 0;
};

}  // namespace tsc
