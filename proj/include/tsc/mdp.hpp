#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsc/traffic.hpp"

namespace tsc {

// Enumerated single-intersection MDP, truncated at a queue cap.
// State index layout: idx = (x1 * (cap+1) + x2) * 4 + y.
class TabularMdp {
public:
    struct Successor {
        int state;
        double prob;
    };

    TabularMdp(ArrivalModel arrivals, int cap, double gamma)
        : arrivals_(arrivals), cap_(cap), gamma_(gamma) {
        if (cap < 1) throw std::invalid_argument("cap must be >= 1");
        if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in (0,1)");
        build();
    }

    int num_states() const { return num_states_; }
    int cap() const { return cap_; }
    double gamma() const { return gamma_; }
    const ArrivalModel& arrivals() const { return arrivals_; }

    int index(const SingleState& s) const {
        return (s.x1 * (cap_ + 1) + s.x2) * 4 + s.y;
    }

    SingleState state(int idx) const {
        SingleState s;
        s.y = idx % 4;
        int q = idx / 4;
        s.x2 = q % (cap_ + 1);
        s.x1 = q / (cap_ + 1);
        return s;
    }

    const std::vector<Successor>& successors(int s, Action a) const {
        return transitions_[static_cast<std::size_t>(s) * 2 + static_cast<std::size_t>(a)];
    }

    double reward(int s, Action a) const {
        return rewards_[static_cast<std::size_t>(s) * 2 + static_cast<std::size_t>(a)];
    }

private:
    void build() {
        num_states_ = (cap_ + 1) * (cap_ + 1) * 4;
        transitions_.resize(static_cast<std::size_t>(num_states_) * 2);
        rewards_.resize(static_cast<std::size_t>(num_states_) * 2);

        const double p = arrivals_.p1;  // both single-intersection flows
        const double pc[2] = {1.0 - p, p};

        for (int si = 0; si < num_states_; ++si) {
            SingleState s = state(si);
            for (int ai = 0; ai < 2; ++ai) {
                Action a = static_cast<Action>(ai);
                auto& row = transitions_[static_cast<std::size_t>(si) * 2 + static_cast<std::size_t>(ai)];
                double expected_cost = 0.0;
                for (int c1 = 0; c1 <= 1; ++c1) {
                    for (int c2 = 0; c2 <= 1; ++c2) {
                        double prob = pc[c1] * pc[c2];
                        if (prob == 0.0) continue;
                        SingleState next = step_single(s, a, c1, c2, cap_);
                        expected_cost += prob * cost_single(next.x1, next.x2);
                        int ni = index(next);
                        bool merged = false;
                        for (auto& succ : row) {
                            if (succ.state == ni) {
                                succ.prob += prob;
                                merged = true;
                                break;
                            }
                        }
                        if (!merged) row.push_back({ni, prob});
                    }
                }
                rewards_[static_cast<std::size_t>(si) * 2 + static_cast<std::size_t>(ai)] = -expected_cost;
            }
        }
    }

    ArrivalModel arrivals_;
    int cap_;
    double gamma_;
    int num_states_ = 0;
    std::vector<std::vector<Successor>> transitions_;
    std::vector<double> rewards_;
};

using ValueFunction = std::vector<double>;          // indexed by state
using TabularPolicy = std::vector<Action>;          // indexed by state
using QTable = std::vector<std::array<double, 2>>;  // [state][action]

struct SolveResult {
    ValueFunction value;
    QTable q;
    TabularPolicy policy;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

template <typename MdpT>
double backup_q(const MdpT& mdp, const ValueFunction& v, int s, Action a) {
    double ev = 0.0;
    for (const auto& succ : mdp.successors(s, a)) ev += succ.prob * v[static_cast<std::size_t>(succ.state)];
    return mdp.reward(s, a) + mdp.gamma() * ev;
}

// Greedy action with ties broken toward Continue.
inline Action greedy_action(double q_continue, double q_switch) {
    return q_switch > q_continue ? Action::Switch : Action::Continue;
}

// Jacobi-style value iteration to sup-norm residual <= tol.
template <typename MdpT>
SolveResult value_iteration(const MdpT& mdp, double tol = 1e-9, int max_iters = 100000) {
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    const int n = mdp.num_states();
    SolveResult out;
    out.value.assign(static_cast<std::size_t>(n), 0.0);
    ValueFunction next(static_cast<std::size_t>(n), 0.0);

    for (int it = 0; it < max_iters; ++it) {
        double diff = 0.0;
        for (int s = 0; s < n; ++s) {
            double qc = backup_q(mdp, out.value, s, Action::Continue);
            double qs = backup_q(mdp, out.value, s, Action::Switch);
            double v = std::max(qc, qs);
            diff = std::max(diff, std::abs(v - out.value[static_cast<std::size_t>(s)]));
            next[static_cast<std::size_t>(s)] = v;
        }
        std::swap(out.value, next);
        out.iterations = it + 1;
        out.residual = diff;
        if (diff <= tol) {
            out.converged = true;
            break;
        }
    }

    out.q.resize(static_cast<std::size_t>(n));
    out.policy.resize(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
        double qc = backup_q(mdp, out.value, s, Action::Continue);
        double qs = backup_q(mdp, out.value, s, Action::Switch);
        out.q[static_cast<std::size_t>(s)] = {qc, qs};
        out.policy[static_cast<std::size_t>(s)] = greedy_action(qc, qs);
    }
    return out;
}

// Iterative evaluation of a fixed policy on the tabular kernel.
template <typename MdpT>
ValueFunction evaluate_policy(const MdpT& mdp, const TabularPolicy& policy,
                              double tol = 1e-12, int max_iters = 1000000) {
    const int n = mdp.num_states();
    ValueFunction v(static_cast<std::size_t>(n), 0.0);
    ValueFunction next(static_cast<std::size_t>(n), 0.0);
    for (int it = 0; it < max_iters; ++it) {
        double diff = 0.0;
        for (int s = 0; s < n; ++s) {
            double val = backup_q(mdp, v, s, policy[static_cast<std::size_t>(s)]);
            diff = std::max(diff, std::abs(val - v[static_cast<std::size_t>(s)]));
            next[static_cast<std::size_t>(s)] = val;
        }
        std::swap(v, next);
        if (diff <= tol) break;
    }
    return v;
}

struct PolicyIterationResult {
    ValueFunction value;
    TabularPolicy policy;
    int improvements = 0;
    bool converged = false;
};

template <typename MdpT>
PolicyIterationResult policy_iteration(const MdpT& mdp, double eval_tol = 1e-12,
                                       int max_improvements = 1000) {
    if (!(eval_tol > 0.0)) throw std::invalid_argument("eval_tol must be > 0");
    const int n = mdp.num_states();
    PolicyIterationResult out;
    out.policy.assign(static_cast<std::size_t>(n), Action::Continue);

    for (int round = 0; round < max_improvements; ++round) {
        out.value = evaluate_policy(mdp, out.policy, eval_tol);
        bool stable = true;
        for (int s = 0; s < n; ++s) {
            double qc = backup_q(mdp, out.value, s, Action::Continue);
            double qs = backup_q(mdp, out.value, s, Action::Switch);
            Action best = greedy_action(qc, qs);
            if (best != out.policy[static_cast<std::size_t>(s)]) {
                out.policy[static_cast<std::size_t>(s)] = best;
                stable = false;
            }
        }
        out.improvements = round + 1;
        if (stable) {
            out.converged = true;
            return out;
        }
    }
    return out;  // converged stays false: improvement failed to stabilize
}

// Per-phase Switch region of a policy with a monotonicity check.
// "Own" queue is the one whose green is active or pending for the phase
// (x1 for phases 0/1, x2 for phases 2/3); "competing" is the other.
struct ThresholdMap {
    struct PhaseBoundary {
        LightPhase phase = 0;
        std::vector<std::pair<int, int>> switch_states;  // (x1, x2) with Switch
        bool monotone = true;
    };
    std::array<PhaseBoundary, 4> phases;
};

inline ThresholdMap extract_threshold_map(const TabularMdp& mdp, const TabularPolicy& policy) {
    ThresholdMap map;
    const int cap = mdp.cap();
    for (int y = 0; y < 4; ++y) {
        auto& pb = map.phases[static_cast<std::size_t>(y)];
        pb.phase = y;
        auto is_switch = [&](int x1, int x2) {
            return policy[static_cast<std::size_t>(mdp.index({x1, x2, y}))] == Action::Switch;
        };
        for (int x1 = 0; x1 <= cap; ++x1)
            for (int x2 = 0; x2 <= cap; ++x2)
                if (is_switch(x1, x2)) pb.switch_states.emplace_back(x1, x2);

        // Monotone: Switch must persist when the competing queue grows and
        // the own queue shrinks (or stays equal). Checked on the
        // truncation-insensitive region (queues <= cap/2): near the cap the
        // clamp discards arrivals, which distorts incentives relative to the
        // untruncated chain (re-solving with a larger cap restores
        // monotonicity over the same region).
        const int lim = cap / 2;
        bool own_is_x1 = (y == 0 || y == 1);
        for (auto [x1, x2] : pb.switch_states) {
            if (x1 > lim || x2 > lim) continue;
            int own = own_is_x1 ? x1 : x2;
            int comp = own_is_x1 ? x2 : x1;
            for (int own2 = 0; own2 <= own && pb.monotone; ++own2) {
                for (int comp2 = comp; comp2 <= lim; ++comp2) {
                    int a1 = own_is_x1 ? own2 : comp2;
                    int a2 = own_is_x1 ? comp2 : own2;
                    if (!is_switch(a1, a2)) {
                        pb.monotone = false;
                        break;
                    }
                }
            }
        }
    }
    return map;
}

}  // namespace tsc
