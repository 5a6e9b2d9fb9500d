// Command-line front end: solve / train / eval / compare / greenwave / render.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tsc/harness.hpp"
#include "tsc/render.hpp"

using namespace tsc;

namespace {

ExperimentConfig load_config(const std::string& config_path, Scenario fallback,
                             std::optional<std::uint64_t> seed_override,
                             std::optional<std::string> out_override) {
    ExperimentConfig cfg = config_path.empty()
                               ? experiment_config_defaults(fallback)
                               : experiment_config_from_json(read_json(config_path));
    if (seed_override) cfg.train.seed = *seed_override;
    if (out_override) cfg.out_dir = *out_override;
    return cfg;
}

int cmd_solve(const ExperimentConfig& cfg) {
    auto art = run_solve(cfg);
    write_solve_artifacts(cfg.out_dir, art);
    write_json_atomic(std::filesystem::path(cfg.out_dir) / "effective_config.json",
                      experiment_config_to_json(cfg));
    std::printf("solved %d states in %d sweeps (residual %.3e)\n", art.mdp->num_states(),
                art.vi.iterations, art.vi.residual);
    std::printf("threshold boundaries monotone: phase0=%d phase2=%d\n",
                art.thresholds.phases[0].monotone ? 1 : 0,
                art.thresholds.phases[2].monotone ? 1 : 0);
    return 0;
}

int cmd_train(const ExperimentConfig& cfg) {
    auto out = run_train(cfg);
    std::printf("trained %ld steps (%ld learning updates); outputs in %s\n",
                cfg.train.total_steps, out.result.learn_steps, cfg.out_dir.c_str());
    return 0;
}

int cmd_compare(const ExperimentConfig& cfg, const std::string& checkpoint_path, int bound) {
    auto agent = load_agent(checkpoint_path);
    auto art = run_solve(cfg);
    auto policy = dqn_tabular_policy(*agent, *art.mdp);
    auto report = compare_policies(*art.mdp, policy, art.vi.policy, art.vi.value, bound);
    std::printf("agreement %.4f on %d states (queues <= %d), cost gap %.4f%%\n", report.agreement,
                report.region_states, bound, report.cost_gap * 100);
    nlohmann::json j{{"agreement", report.agreement},
                     {"region_bound", bound},
                     {"region_states", report.region_states},
                     {"disagreements", report.disagreements},
                     {"cost_gap", report.cost_gap},
                     {"dqn_value_at_origin", report.dqn_value_at_origin},
                     {"optimal_value_at_origin", report.optimal_value_at_origin}};
    std::filesystem::create_directories(cfg.out_dir);
    write_json_atomic(std::filesystem::path(cfg.out_dir) / "compare.json", j);
    return 0;
}

int cmd_eval(const ExperimentConfig& cfg, const std::string& policy_name,
             const std::string& checkpoint_path) {
    std::unique_ptr<DqnAgent> agent;
    std::unique_ptr<RolloutPolicy> policy;
    ActionHead head{cfg.n_intersections, 2};
    if (policy_name == "checkpoint") {
        agent = load_agent(checkpoint_path);
        policy = std::make_unique<GreedyDqnPolicy>(*agent);
    } else if (policy_name == "random") {
        policy = std::make_unique<UniformRandomPolicy>(head);
    } else if (policy_name == "always-continue") {
        policy = std::make_unique<AlwaysContinuePolicy>(head);
    } else if (policy_name.rfind("fixed-cycle:", 0) == 0) {
        policy = std::make_unique<FixedCyclePolicy>(head, std::stoi(policy_name.substr(12)));
    } else {
        throw std::invalid_argument("unknown policy '" + policy_name + "'");
    }

    auto summary = run_eval_linear(cfg, *policy);
    std::printf("policy %s: mean discounted cost %.2f, mean total queue %.3f over %d seeds\n",
                policy_name.c_str(), summary.mean_discounted_cost, summary.mean_total_queue,
                summary.seeds);
    for (std::size_t n = 0; n < summary.phase_occupancy.size(); ++n)
        std::printf("  intersection %zu phase occupancy: %.3f %.3f %.3f %.3f\n", n + 1,
                    summary.phase_occupancy[n][0], summary.phase_occupancy[n][1],
                    summary.phase_occupancy[n][2], summary.phase_occupancy[n][3]);
    return 0;
}

int cmd_greenwave(const ExperimentConfig& cfg, const std::string& checkpoint_path, long horizon) {
    auto agent = load_agent(checkpoint_path);
    auto cmp = greenwave_vs_random(cfg, *agent, horizon);
    std::printf("chains (len >= %d): agent %ld, random %ld; agent wins %ld/%d seeds\n",
                cfg.greenwave_min_chain, cmp.agent_report.chain_count,
                cmp.baseline_report.chain_count, cmp.seed_wins_chains, cmp.seeds);
    std::printf("consecutive-reduction runs: agent %ld, random %ld; agent wins %ld/%d seeds\n",
                cmp.agent_report.reduction_runs, cmp.baseline_report.reduction_runs,
                cmp.seed_wins_reductions, cmp.seeds);
    return 0;
}

int cmd_render(const ExperimentConfig& cfg, const std::string& checkpoint_path, long first,
               long last, std::uint64_t seed) {
    std::unique_ptr<DqnAgent> agent;
    std::unique_ptr<RolloutPolicy> policy;
    if (!checkpoint_path.empty()) {
        agent = load_agent(checkpoint_path);
        policy = std::make_unique<GreedyDqnPolicy>(*agent);
    } else {
        policy = std::make_unique<UniformRandomPolicy>(ActionHead{cfg.n_intersections, 2});
    }
    LinearConfig lc{cfg.n_intersections, cfg.travel_delay, cfg.arrivals, cfg.queue_cap};
    Trajectory traj;
    rollout_linear(lc, *policy, seed, last + 1, cfg.solver_gamma, nullptr, &traj);
    std::fputs(render_ascii(traj, first, last).c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Traffic-signal control lab: exact MDP oracle + DQN"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    app.add_option("--config", config_path, "experiment config JSON")->capture_default_str();
    app.add_option("--seed", seed, "override training seed");
    app.add_option("--out", out_dir, "override output directory");

    auto* solve = app.add_subcommand("solve", "exact value/policy iteration oracle");
    auto* train = app.add_subcommand("train", "train the DQN agent");
    auto* compare = app.add_subcommand("compare", "DQN policy vs exact oracle");
    auto* eval = app.add_subcommand("eval", "frozen-policy rollouts on the linear artery");
    auto* greenwave = app.add_subcommand("greenwave", "paired-seed greenwave comparison");
    auto* render = app.add_subcommand("render", "ASCII trajectory frames");

    std::string checkpoint_path;
    int region_bound = 10;
    compare->add_option("--checkpoint", checkpoint_path, "agent checkpoint")->required();
    compare->add_option("--bound", region_bound, "queue bound of the comparison region");

    std::string policy_name = "checkpoint";
    std::string eval_checkpoint;
    eval->add_option("--policy", policy_name,
                     "checkpoint | random | always-continue | fixed-cycle:<g>");
    eval->add_option("--checkpoint", eval_checkpoint, "agent checkpoint");

    std::string gw_checkpoint;
    long gw_horizon = 10000;
    greenwave->add_option("--checkpoint", gw_checkpoint, "agent checkpoint")->required();
    greenwave->add_option("--horizon", gw_horizon, "rollout length");

    std::string render_checkpoint;
    long render_first = 0, render_last = 20;
    std::uint64_t render_seed = 1;
    render->add_option("--checkpoint", render_checkpoint, "agent checkpoint (default: random)");
    render->add_option("--first", render_first, "first step");
    render->add_option("--last", render_last, "last step");
    render->add_option("--rollout-seed", render_seed, "evaluation seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(load_config(config_path, Scenario::Single, seed, out_dir));
        if (train->parsed()) return cmd_train(load_config(config_path, Scenario::Single, seed, out_dir));
        if (compare->parsed())
            return cmd_compare(load_config(config_path, Scenario::Single, seed, out_dir),
                               checkpoint_path, region_bound);
        if (eval->parsed())
            return cmd_eval(load_config(config_path, Scenario::Linear, seed, out_dir), policy_name,
                            eval_checkpoint);
        if (greenwave->parsed())
            return cmd_greenwave(load_config(config_path, Scenario::Linear, seed, out_dir),
                                 gw_checkpoint, gw_horizon);
        if (render->parsed())
            return cmd_render(load_config(config_path, Scenario::Linear, seed, out_dir),
                              render_checkpoint, render_first, render_last, render_seed);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
