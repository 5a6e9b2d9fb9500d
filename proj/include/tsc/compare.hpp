#pragma once

#include <cmath>
#include <stdexcept>

#include "tsc/dqn.hpp"
#include "tsc/mdp.hpp"

namespace tsc {

// Greedy DQN policy materialized over the whole truncated state space.
inline TabularPolicy dqn_tabular_policy(const DqnAgent& agent, const TabularMdp& mdp) {
    if (agent.eval_net().input_dim() != 3)
        throw std::invalid_argument("state encoding width mismatch: expected single-intersection agent");
    TabularPolicy policy(static_cast<std::size_t>(mdp.num_states()), Action::Continue);
    for (int s = 0; s < mdp.num_states(); ++s) {
        auto a = agent.greedy_action(encode_single(mdp.state(s)));
        policy[static_cast<std::size_t>(s)] = static_cast<Action>(a[0]);
    }
    return policy;
}

struct AgreementReport {
    double agreement = 0.0;      // fraction of region states with matching action
    int region_states = 0;
    int disagreements = 0;
    double dqn_value_at_origin = 0.0;     // V_pi(0,0,0) on the tabular kernel
    double optimal_value_at_origin = 0.0;
    double cost_gap = 0.0;       // relative discounted-cost excess at the origin
};

// Agreement of a candidate policy with the oracle policy on all states with
// both queues <= region_bound (all four phases), plus the exact relative
// discounted-cost gap at the empty starting state (x1=x2=0, y=0) computed by
// policy evaluation on the tabular kernel.
inline AgreementReport compare_policies(const TabularMdp& mdp, const TabularPolicy& candidate,
                                        const TabularPolicy& oracle, const ValueFunction& oracle_value,
                                        int region_bound) {
    AgreementReport report;
    for (int x1 = 0; x1 <= region_bound; ++x1)
        for (int x2 = 0; x2 <= region_bound; ++x2)
            for (int y = 0; y < 4; ++y) {
                int s = mdp.index({x1, x2, y});
                ++report.region_states;
                if (candidate[static_cast<std::size_t>(s)] != oracle[static_cast<std::size_t>(s)])
                    ++report.disagreements;
            }
    report.agreement =
        1.0 - static_cast<double>(report.disagreements) / report.region_states;

    ValueFunction v_pi = evaluate_policy(mdp, candidate);
    int origin = mdp.index({0, 0, 0});
    report.dqn_value_at_origin = v_pi[static_cast<std::size_t>(origin)];
    report.optimal_value_at_origin = oracle_value[static_cast<std::size_t>(origin)];
    double opt_cost = -report.optimal_value_at_origin;
    double pi_cost = -report.dqn_value_at_origin;
    report.cost_gap = opt_cost > 0.0 ? (pi_cost - opt_cost) / opt_cost : 0.0;
    return report;
}

}  // namespace tsc
