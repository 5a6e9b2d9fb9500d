#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "tsc/net.hpp"
#include "tsc/rng.hpp"
#include "tsc/traffic.hpp"

namespace tsc {

struct Transition {
    std::vector<double> s;
    std::vector<int> a;  // one action index per head
    double r = 0.0;
    std::vector<double> s_next;
};

// Bounded ring of transitions, oldest-first eviction.
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("capacity must be positive");
    }

    void push(Transition t) {
        if (ring_.size() < capacity_) {
            ring_.push_back(std::move(t));
        } else {
            ring_[next_] = std::move(t);
        }
        next_ = (next_ + 1) % capacity_;
        ++inserted_;
    }

    std::size_t size() const { return ring_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::size_t inserted() const { return inserted_; }

    const Transition& sample(Rng& rng) const { return ring_[rng.uniform_index(ring_.size())]; }

    // k-th oldest item still stored (0 = oldest).
    const Transition& oldest(std::size_t k) const {
        if (ring_.size() < capacity_) return ring_[k];
        return ring_[(next_ + k) % capacity_];
    }

private:
    std::size_t capacity_;
    std::vector<Transition> ring_;
    std::size_t next_ = 0;
    std::size_t inserted_ = 0;
};

// State encodings are pinned so checkpoints stay valid across runs:
// single intersection -> [x1, x2, y]; linear -> [X_11..X_N4 row-major,
// Y_1..Y_N].
inline std::vector<double> encode_single(const SingleState& s) {
    return {static_cast<double>(s.x1), static_cast<double>(s.x2), static_cast<double>(s.y)};
}

inline std::vector<double> encode_linear(const LinearState& s) {
    std::vector<double> v;
    v.reserve(s.queues.size() * 5);
    for (const auto& q : s.queues)
        for (int x : q) v.push_back(static_cast<double>(x));
    for (LightPhase y : s.phases) v.push_back(static_cast<double>(y));
    return v;
}

// Action-head layout. The network's final layer is split into `heads`
// groups of `width` outputs; each head picks its own argmax.
//   single intersection: 1 head of width 2
//   linear, factored:    N heads of width 2 (per-intersection Continue/Switch)
//   linear, joint:       1 head of width 2^N (bit n = intersection n's action)
struct ActionHead {
    int heads = 1;
    int width = 2;
    int output_dim() const { return heads * width; }
};

enum class HeadMode { Factored, Joint };

struct TrainConfig {
    long total_steps = 200000;        // K
    long warmup = 500;                // k0
    std::size_t memory_capacity = 50000;
    int minibatch = 32;               // B
    double gamma = 0.99;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double epsilon_decay_fraction = 0.3;  // linear decay over this fraction of K
    int target_sync = 200;            // learning steps between target syncs
    int learn_every = 1;              // env steps between learning operations
    std::uint64_t seed = 1;
    std::vector<int> hidden_dims = {64, 32};
    double adam_lr = 1e-3;
    double adam_lr_final = -1.0;  // >= 0: linear decay to this over the learning phase
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    HeadMode head_mode = HeadMode::Factored;

    void validate() const {
        if (warmup >= total_steps) throw std::invalid_argument("warmup must be < total_steps");
        if (static_cast<std::size_t>(minibatch) > memory_capacity)
            throw std::invalid_argument("minibatch must be <= memory capacity");
        if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in (0,1)");
        if (learn_every < 1) throw std::invalid_argument("learn_every must be >= 1");
        if (target_sync < 1) throw std::invalid_argument("target_sync must be >= 1");
    }

    double lr_at(long step) const {
        if (adam_lr_final < 0.0 || total_steps <= warmup + 1) return adam_lr;
        double frac = static_cast<double>(step - warmup) / static_cast<double>(total_steps - warmup);
        frac = std::clamp(frac, 0.0, 1.0);
        return adam_lr + frac * (adam_lr_final - adam_lr);
    }

    double epsilon_at(long step) const {
        double horizon = epsilon_decay_fraction * static_cast<double>(total_steps);
        if (horizon <= 0.0) return epsilon_end;
        double frac = std::min(1.0, static_cast<double>(step) / horizon);
        return epsilon_start + frac * (epsilon_end - epsilon_start);
    }
};

class DqnAgent {
public:
    DqnAgent(int state_dim, ActionHead head, const TrainConfig& cfg)
        : head_(head), config_(cfg), memory_(cfg.memory_capacity), init_rng_(cfg.seed) {
        std::vector<int> dims{state_dim};
        dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
        dims.push_back(head.output_dim());
        eval_net_ = Mlp(dims, init_rng_);
        target_net_ = eval_net_;
        optimizer_ = AdamState::for_net(eval_net_, cfg.adam_lr);
        optimizer_.beta1 = cfg.adam_beta1;
        optimizer_.beta2 = cfg.adam_beta2;
        optimizer_.epsilon = cfg.adam_epsilon;
    }

    const Mlp& eval_net() const { return eval_net_; }
    const Mlp& target_net() const { return target_net_; }
    Mlp& eval_net() { return eval_net_; }
    Mlp& target_net() { return target_net_; }
    const AdamState& optimizer() const { return optimizer_; }
    ReplayMemory& memory() { return memory_; }
    const ActionHead& head() const { return head_; }
    const TrainConfig& config() const { return config_; }
    long global_step() const { return global_step_; }
    long learn_count() const { return learn_count_; }

    // Per-head argmax of the eval network, ties to the lowest index.
    std::vector<int> greedy_action(const std::vector<double>& s) const {
        return argmax_heads(eval_net_.forward(s));
    }

    std::vector<int> select_action(const std::vector<double>& s, double epsilon, Rng& rng) const {
        if (rng.uniform() < epsilon) {
            std::vector<int> a(static_cast<std::size_t>(head_.heads));
            for (auto& ai : a) ai = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(head_.width)));
            return a;
        }
        return greedy_action(s);
    }

    // r + gamma * max_a' target_net(s')[a'], per head.
    std::vector<double> td_target(const Transition& t) const {
        auto out = target_net_.forward(t.s_next);
        std::vector<double> targets(static_cast<std::size_t>(head_.heads));
        for (int h = 0; h < head_.heads; ++h) {
            double best = out[static_cast<std::size_t>(h) * head_.width];
            for (int w = 1; w < head_.width; ++w)
                best = std::max(best, out[static_cast<std::size_t>(h) * head_.width + w]);
            targets[static_cast<std::size_t>(h)] = t.r + config_.gamma * best;
        }
        return targets;
    }

    // One minibatch TD-regression update. Samples uniformly
    // with replacement, regresses each sample's taken action slot onto its
    // TD target, averages gradients, runs one Adam step, and syncs the
    // target network every `target_sync` learning steps.
    double learn_step(Rng& rng) {
        if (global_step_ <= config_.warmup)
            throw std::logic_error("learn_step called before warm-up completed");
        if (memory_.size() == 0) throw std::logic_error("learn_step called with empty memory");

        GradientBundle grads = GradientBundle::zeros_like(eval_net_);
        double loss = 0.0;
        const int B = config_.minibatch;
        const int H = head_.heads;
        for (int b = 0; b < B; ++b) {
            const Transition& t = memory_.sample(rng);
            auto targets = td_target(t);
            auto out = eval_net_.forward(t.s);
            std::vector<double> ograd(out.size(), 0.0);
            for (int h = 0; h < H; ++h) {
                std::size_t idx = static_cast<std::size_t>(h) * head_.width +
                                  static_cast<std::size_t>(t.a[static_cast<std::size_t>(h)]);
                double diff = targets[static_cast<std::size_t>(h)] - out[idx];
                loss += diff * diff;
                ograd[idx] = -2.0 * diff / (B * H);
            }
            backprop_accumulate(eval_net_, t.s, ograd, grads);
        }
        loss /= static_cast<double>(B) * H;
        adam_step(eval_net_, optimizer_, grads);
        ++learn_count_;
        if (learn_count_ % config_.target_sync == 0) copy_parameters(eval_net_, target_net_);
        return loss;
    }

    void record_transition(Transition t) { memory_.push(std::move(t)); }
    void advance_step() { ++global_step_; }
    void sync_target() { copy_parameters(eval_net_, target_net_); }

    void set_counters(long global_step, long learn_count) {
        global_step_ = global_step;
        learn_count_ = learn_count;
    }

    std::vector<int> argmax_heads(const std::vector<double>& out) const {
        std::vector<int> a(static_cast<std::size_t>(head_.heads), 0);
        for (int h = 0; h < head_.heads; ++h) {
            std::size_t base = static_cast<std::size_t>(h) * head_.width;
            int best = 0;
            for (int w = 1; w < head_.width; ++w)
                if (out[base + w] > out[base + best]) best = w;
            a[static_cast<std::size_t>(h)] = best;
        }
        return a;
    }

    AdamState& optimizer() { return optimizer_; }

private:
    ActionHead head_;
    TrainConfig config_;
    Mlp eval_net_;
    Mlp target_net_;
    AdamState optimizer_;
    ReplayMemory memory_;
    Rng init_rng_;
    long global_step_ = 0;
    long learn_count_ = 0;
};

// Adapter giving the training loop a uniform view of both environments.
struct EnvAdapter {
    virtual ~EnvAdapter() = default;
    virtual void reset() = 0;
    virtual int state_dim() const = 0;
    virtual ActionHead action_head() const = 0;
    virtual std::vector<double> encode() const = 0;
    // Applies the per-head action indices, sampling arrivals from the given
    // stream; returns the post-step congestion cost.
    virtual double step(const std::vector<int>& head_actions, Rng& arrival_rng) = 0;
};

class SingleEnvAdapter : public EnvAdapter {
public:
    explicit SingleEnvAdapter(ArrivalModel arrivals, std::optional<int> queue_cap = std::nullopt)
        : env_(arrivals, queue_cap) {}

    void reset() override { env_.reset(); }
    int state_dim() const override { return 3; }
    ActionHead action_head() const override { return {1, 2}; }
    std::vector<double> encode() const override { return encode_single(env_.state()); }

    double step(const std::vector<int>& head_actions, Rng& arrival_rng) override {
        return static_cast<double>(env_.step(static_cast<Action>(head_actions[0]), arrival_rng));
    }

    const SingleEnv& env() const { return env_; }

private:
    SingleEnv env_;
};

class LinearEnvAdapter : public EnvAdapter {
public:
    LinearEnvAdapter(const LinearConfig& cfg, HeadMode mode) : env_(cfg), mode_(mode) {
        if (mode == HeadMode::Joint && cfg.n_intersections > 3)
            throw std::invalid_argument("joint action head limited to N <= 3");
    }

    void reset() override { env_.reset(); }
    int state_dim() const override { return 5 * env_.config().n_intersections; }

    ActionHead action_head() const override {
        int n = env_.config().n_intersections;
        if (mode_ == HeadMode::Joint) return {1, 1 << n};
        return {n, 2};
    }

    std::vector<double> encode() const override { return encode_linear(env_.state()); }

    double step(const std::vector<int>& head_actions, Rng& arrival_rng) override {
        return static_cast<double>(env_.step(decode_actions(head_actions), arrival_rng));
    }

    std::vector<Action> decode_actions(const std::vector<int>& head_actions) const {
        int n = env_.config().n_intersections;
        std::vector<Action> acts(static_cast<std::size_t>(n));
        if (mode_ == HeadMode::Joint) {
            int code = head_actions[0];
            for (int k = 0; k < n; ++k) acts[static_cast<std::size_t>(k)] = static_cast<Action>((code >> k) & 1);
        } else {
            for (int k = 0; k < n; ++k)
                acts[static_cast<std::size_t>(k)] = static_cast<Action>(head_actions[static_cast<std::size_t>(k)]);
        }
        return acts;
    }

    LinearEnv& env() { return env_; }
    const LinearEnv& env() const { return env_; }

private:
    LinearEnv env_;
    HeadMode mode_;
};

struct StepRecord {
    long step = 0;
    double reward = 0.0;
    double loss = std::numeric_limits<double>::quiet_NaN();  // NaN when no learning ran
    double epsilon = 0.0;
    double windowed_return = 0.0;
};

struct TrainResult {
    std::vector<StepRecord> metrics;
    bool nan_detected = false;
    long transitions_stored = 0;
    long learn_steps = 0;
};

// Full training loop: zero-initialized environment, epsilon-greedy action
// from the eval network, arrival sampling, env step, reward = -cost of the
// post-step queues, replay insert, then (past warm-up, every learn_every
// steps) one minibatch update. Deterministic for a given config + seed.
// `on_record` may be null.
inline TrainResult train(DqnAgent& agent, EnvAdapter& env, const TrainConfig& cfg,
                         const std::function<void(const StepRecord&)>& on_record = nullptr,
                         int metrics_window = 200) {
    cfg.validate();
    TrainResult result;
    Rng arrival_rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 1);
    Rng policy_rng(cfg.seed * 0xbf58476d1ce4e5b9ULL + 2);
    env.reset();

    double window_return = 0.0;
    double window_discount = 1.0;
    long window_pos = 0;

    for (long k = 1; k <= cfg.total_steps; ++k) {
        std::vector<double> obs = env.encode();
        double eps = cfg.epsilon_at(k);
        std::vector<int> action = agent.select_action(obs, eps, policy_rng);
        double cost = env.step(action, arrival_rng);
        double reward = -cost;
        std::vector<double> obs_next = env.encode();
        agent.record_transition({std::move(obs), action, reward, std::move(obs_next)});
        ++result.transitions_stored;
        agent.advance_step();

        StepRecord rec;
        rec.step = k;
        rec.reward = reward;
        rec.epsilon = eps;

        if (k > cfg.warmup && (k - cfg.warmup - 1) % cfg.learn_every == 0 &&
            agent.memory().size() >= static_cast<std::size_t>(cfg.minibatch)) {
            agent.optimizer().lr = cfg.lr_at(k);
            rec.loss = agent.learn_step(policy_rng);
            ++result.learn_steps;
            if (!std::isfinite(rec.loss)) {
                result.nan_detected = true;
                result.metrics.push_back(rec);
                if (on_record) on_record(rec);
                break;
            }
        }

        // Windowed discounted return restarts every `metrics_window` steps.
        window_return += window_discount * reward;
        window_discount *= cfg.gamma;
        ++window_pos;
        if (window_pos == metrics_window) {
            window_pos = 0;
            window_discount = 1.0;
            rec.windowed_return = window_return;
            window_return = 0.0;
        } else {
            rec.windowed_return = std::numeric_limits<double>::quiet_NaN();
        }

        result.metrics.push_back(rec);
        if (on_record) on_record(rec);
    }
    return result;
}

}  // namespace tsc
