#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsc/checkpoint.hpp"
#include "tsc/compare.hpp"
#include "tsc/config.hpp"
#include "tsc/dqn.hpp"
#include "tsc/eval.hpp"
#include "tsc/greenwave.hpp"
#include "tsc/io.hpp"
#include "tsc/mdp.hpp"
#include "tsc/policies.hpp"

namespace tsc {

struct SolveArtifacts {
    std::unique_ptr<TabularMdp> mdp;
    SolveResult vi;
    PolicyIterationResult pi;
    ThresholdMap thresholds;
};

// Exact oracle for the single intersection: value iteration plus policy
// iteration on the truncated kernel, with the threshold map of the greedy
// policy.
inline SolveArtifacts run_solve(const ExperimentConfig& cfg) {
    if (cfg.scenario != Scenario::Single)
        throw std::invalid_argument("exact solve is only available for the single intersection");
    SolveArtifacts art;
    art.mdp = std::make_unique<TabularMdp>(cfg.arrivals, cfg.solver_cap, cfg.solver_gamma);
    art.vi = value_iteration(*art.mdp, cfg.solver_tol);
    if (!art.vi.converged) throw std::runtime_error("value iteration did not converge");
    art.pi = policy_iteration(*art.mdp);
    if (!art.pi.converged) throw std::runtime_error("policy iteration did not stabilize");
    art.thresholds = extract_threshold_map(*art.mdp, art.vi.policy);
    return art;
}

inline nlohmann::json policy_to_json(const TabularMdp& mdp, const TabularPolicy& policy,
                                     const ValueFunction& value) {
    nlohmann::json states = nlohmann::json::array();
    for (int s = 0; s < mdp.num_states(); ++s) {
        SingleState st = mdp.state(s);
        states.push_back({{"x1", st.x1},
                          {"x2", st.x2},
                          {"y", st.y},
                          {"value", value[static_cast<std::size_t>(s)]},
                          {"action", static_cast<int>(policy[static_cast<std::size_t>(s)])}});
    }
    return {{"cap", mdp.cap()},
            {"gamma", mdp.gamma()},
            {"p1", mdp.arrivals().p1},
            {"num_states", mdp.num_states()},
            {"states", states}};
}

inline std::string policy_to_csv(const TabularMdp& mdp, const TabularPolicy& policy,
                                 const ValueFunction& value, const QTable& q) {
    std::string out = "x1,x2,y,value,q_continue,q_switch,action\n";
    for (int s = 0; s < mdp.num_states(); ++s) {
        SingleState st = mdp.state(s);
        out += std::to_string(st.x1) + "," + std::to_string(st.x2) + "," + std::to_string(st.y) +
               "," + format_double(value[static_cast<std::size_t>(s)]) + "," +
               format_double(q[static_cast<std::size_t>(s)][0]) + "," +
               format_double(q[static_cast<std::size_t>(s)][1]) + "," +
               std::to_string(static_cast<int>(policy[static_cast<std::size_t>(s)])) + "\n";
    }
    return out;
}

inline nlohmann::json threshold_map_to_json(const ThresholdMap& map) {
    nlohmann::json phases = nlohmann::json::array();
    for (const auto& pb : map.phases) {
        nlohmann::json sw = nlohmann::json::array();
        for (auto [x1, x2] : pb.switch_states) sw.push_back({x1, x2});
        phases.push_back({{"phase", pb.phase}, {"monotone", pb.monotone}, {"switch_states", sw}});
    }
    return {{"phases", phases}};
}

inline void write_solve_artifacts(const std::filesystem::path& dir, const SolveArtifacts& art) {
    std::filesystem::create_directories(dir);
    write_json_atomic(dir / "policy.json", policy_to_json(*art.mdp, art.vi.policy, art.vi.value));
    write_file_atomic(dir / "policy.csv",
                      policy_to_csv(*art.mdp, art.vi.policy, art.vi.value, art.vi.q));
    write_json_atomic(dir / "threshold_map.json", threshold_map_to_json(art.thresholds));
}

inline std::unique_ptr<EnvAdapter> make_env_adapter(const ExperimentConfig& cfg) {
    if (cfg.scenario == Scenario::Single) {
        return std::make_unique<SingleEnvAdapter>(cfg.arrivals, cfg.queue_cap);
    }
    LinearConfig lc{cfg.n_intersections, cfg.travel_delay, cfg.arrivals, cfg.queue_cap};
    return std::make_unique<LinearEnvAdapter>(lc, cfg.train.head_mode);
}

struct TrainOutputs {
    std::unique_ptr<DqnAgent> agent;
    TrainResult result;
    int state_dim = 0;
};

inline std::string metrics_csv_header() {
    return "step,reward,loss,epsilon,windowed_discounted_return";
}

inline std::string metrics_csv_row(const StepRecord& r) {
    auto opt = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
    return std::to_string(r.step) + "," + format_double(r.reward) + "," + opt(r.loss) + "," +
           format_double(r.epsilon) + "," + opt(r.windowed_return);
}

// Trains per the experiment config. When out_dir is non-empty, writes
// metrics.csv, checkpoint.json, and the defaults-resolved effective config.
// Aborts (throws) on non-finite loss.
inline TrainOutputs run_train(const ExperimentConfig& cfg, bool write_outputs = true) {
    auto env = make_env_adapter(cfg);
    TrainOutputs out;
    out.state_dim = env->state_dim();
    out.agent = std::make_unique<DqnAgent>(env->state_dim(), env->action_head(), cfg.train);
    out.result = train(*out.agent, *env, cfg.train);
    if (out.result.nan_detected) throw std::runtime_error("training diverged: non-finite loss");

    if (write_outputs) {
        std::filesystem::path dir(cfg.out_dir);
        std::filesystem::create_directories(dir);
        CsvWriter csv(dir / "metrics.csv", metrics_csv_header());
        for (const auto& rec : out.result.metrics) csv.append_row(metrics_csv_row(rec));
        csv.finalize();
        save_agent(dir / "checkpoint.json", *out.agent, out.state_dim);
        write_json_atomic(dir / "effective_config.json", experiment_config_to_json(cfg));
    }
    return out;
}

struct BaselineResult {
    std::string name;
    EvalSummary summary;
};

// Frozen-policy evaluation with paired arrival seeds across policies.
inline EvalSummary run_eval_linear(const ExperimentConfig& cfg, RolloutPolicy& policy) {
    LinearConfig lc{cfg.n_intersections, cfg.travel_delay, cfg.arrivals, cfg.queue_cap};
    return evaluate_linear(lc, policy, eval_seed_list(cfg), cfg.eval_horizon, cfg.solver_gamma);
}

// Sweep of fixed-cycle green durations; returns the best (lowest mean
// discounted cost) plus every entry.
inline std::pair<BaselineResult, std::vector<BaselineResult>> fixed_cycle_sweep(
    const ExperimentConfig& cfg, int g_min = 2, int g_max = 10) {
    ActionHead head{cfg.n_intersections, 2};
    std::vector<BaselineResult> all;
    for (int g = g_min; g <= g_max; ++g) {
        FixedCyclePolicy policy(head, g);
        all.push_back({"fixed-cycle-g" + std::to_string(g), run_eval_linear(cfg, policy)});
    }
    BaselineResult best = all.front();
    for (const auto& b : all)
        if (b.summary.mean_discounted_cost < best.summary.mean_discounted_cost) best = b;
    return {best, all};
}

struct GreenwaveComparison {
    GreenwaveReport agent_report;
    GreenwaveReport baseline_report;
    long seed_wins_chains = 0;      // seeds where the agent had strictly more chains
    long seed_wins_reductions = 0;
    int seeds = 0;
};

// Paired-seed greenwave comparison between a trained agent and the uniform
// random baseline over `horizon`-step rollouts.
inline GreenwaveComparison greenwave_vs_random(const ExperimentConfig& cfg, const DqnAgent& agent,
                                               long horizon) {
    LinearConfig lc{cfg.n_intersections, cfg.travel_delay, cfg.arrivals, cfg.queue_cap};
    GreedyDqnPolicy agent_policy(agent);
    UniformRandomPolicy random_policy(ActionHead{cfg.n_intersections, 2});
    GreenwaveComparison cmp;
    for (std::uint64_t seed : eval_seed_list(cfg)) {
        Trajectory agent_traj, random_traj;
        rollout_linear(lc, agent_policy, seed, horizon, cfg.solver_gamma, nullptr, &agent_traj);
        rollout_linear(lc, random_policy, seed, horizon, cfg.solver_gamma, nullptr, &random_traj);
        auto ar = detect_greenwave(agent_traj, cfg.travel_delay, cfg.greenwave_min_chain);
        auto rr = detect_greenwave(random_traj, cfg.travel_delay, cfg.greenwave_min_chain);
        cmp.agent_report.chain_count += ar.chain_count;
        cmp.agent_report.reduction_runs += ar.reduction_runs;
        cmp.baseline_report.chain_count += rr.chain_count;
        cmp.baseline_report.reduction_runs += rr.reduction_runs;
        if (ar.chain_count > rr.chain_count) ++cmp.seed_wins_chains;
        if (ar.reduction_runs > rr.reduction_runs) ++cmp.seed_wins_reductions;
        ++cmp.seeds;
    }
    return cmp;
}

}  // namespace tsc
