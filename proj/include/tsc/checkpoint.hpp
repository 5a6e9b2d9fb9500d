#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "tsc/dqn.hpp"
#include "tsc/io.hpp"

namespace tsc {

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
    return {
        {"total_steps", c.total_steps},
        {"warmup", c.warmup},
        {"memory_capacity", c.memory_capacity},
        {"minibatch", c.minibatch},
        {"gamma", c.gamma},
        {"epsilon_start", c.epsilon_start},
        {"epsilon_end", c.epsilon_end},
        {"epsilon_decay_fraction", c.epsilon_decay_fraction},
        {"target_sync", c.target_sync},
        {"learn_every", c.learn_every},
        {"seed", c.seed},
        {"hidden_dims", c.hidden_dims},
        {"adam_lr", c.adam_lr},
        {"adam_lr_final", c.adam_lr_final},
        {"adam_beta1", c.adam_beta1},
        {"adam_beta2", c.adam_beta2},
        {"adam_epsilon", c.adam_epsilon},
        {"action_head", c.head_mode == HeadMode::Joint ? "joint" : "factored"},
    };
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.total_steps = j.at("total_steps").get<long>();
    c.warmup = j.at("warmup").get<long>();
    c.memory_capacity = j.at("memory_capacity").get<std::size_t>();
    c.minibatch = j.at("minibatch").get<int>();
    c.gamma = j.at("gamma").get<double>();
    c.epsilon_start = j.at("epsilon_start").get<double>();
    c.epsilon_end = j.at("epsilon_end").get<double>();
    c.epsilon_decay_fraction = j.at("epsilon_decay_fraction").get<double>();
    c.target_sync = j.at("target_sync").get<int>();
    c.learn_every = j.at("learn_every").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.hidden_dims = j.at("hidden_dims").get<std::vector<int>>();
    c.adam_lr = j.at("adam_lr").get<double>();
    c.adam_lr_final = j.value("adam_lr_final", -1.0);
    c.adam_beta1 = j.at("adam_beta1").get<double>();
    c.adam_beta2 = j.at("adam_beta2").get<double>();
    c.adam_epsilon = j.at("adam_epsilon").get<double>();
    c.head_mode = j.at("action_head").get<std::string>() == "joint" ? HeadMode::Joint : HeadMode::Factored;
    return c;
}

// Full agent checkpoint: both networks, optimizer moments, config, and step
// counters. Doubles round-trip bit-exactly through the JSON layer.
inline nlohmann::json agent_to_json(const DqnAgent& agent, int state_dim) {
    nlohmann::json j;
    j["format"] = "tsc-dqn-checkpoint-v1";
    j["state_dim"] = state_dim;
    j["heads"] = agent.head().heads;
    j["head_width"] = agent.head().width;
    j["config"] = train_config_to_json(agent.config());
    j["eval_net"] = mlp_to_json(agent.eval_net());
    j["target_net"] = mlp_to_json(agent.target_net());
    j["optimizer"] = adam_to_json(agent.optimizer());
    j["global_step"] = agent.global_step();
    j["learn_count"] = agent.learn_count();
    return j;
}

inline std::unique_ptr<DqnAgent> agent_from_json(const nlohmann::json& j) {
    if (j.at("format").get<std::string>() != "tsc-dqn-checkpoint-v1")
        throw std::runtime_error("unsupported checkpoint format");
    TrainConfig cfg = train_config_from_json(j.at("config"));
    ActionHead head{j.at("heads").get<int>(), j.at("head_width").get<int>()};
    auto agent = std::make_unique<DqnAgent>(j.at("state_dim").get<int>(), head, cfg);
    agent->eval_net() = mlp_from_json(j.at("eval_net"));
    agent->target_net() = mlp_from_json(j.at("target_net"));
    agent->optimizer() = adam_from_json(j.at("optimizer"), agent->eval_net());
    agent->set_counters(j.at("global_step").get<long>(), j.at("learn_count").get<long>());
    return agent;
}

inline void save_agent(const std::filesystem::path& path, const DqnAgent& agent, int state_dim) {
    write_json_atomic(path, agent_to_json(agent, state_dim));
}

inline std::unique_ptr<DqnAgent> load_agent(const std::filesystem::path& path) {
    return agent_from_json(read_json(path));
}

}  // namespace tsc
