#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "tsc/rng.hpp"

namespace tsc {

// Dense feed-forward network. Hidden layers use ReLU, the final layer is
// linear so Q-values stay unbounded. All math is double precision.
class Mlp {
public:
    struct Layer {
        std::vector<double> weights;  // row-major, out x in
        std::vector<double> biases;   // out
        int in = 0;
        int out = 0;
        bool relu = false;
    };

    Mlp() = default;

    // dims = {input, hidden..., output}. He-uniform scaling for ReLU layers,
    // Xavier-uniform for the final linear layer, biases zero.
    Mlp(const std::vector<int>& dims, Rng& rng) {
        if (dims.size() < 2) throw std::invalid_argument("need at least input and output dims");
        for (int d : dims)
            if (d <= 0) throw std::invalid_argument("layer dims must be positive");
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            Layer layer;
            layer.in = dims[l];
            layer.out = dims[l + 1];
            layer.relu = (l + 2 < dims.size());
            double limit = layer.relu ? std::sqrt(6.0 / layer.in)
                                      : std::sqrt(6.0 / (layer.in + layer.out));
            layer.weights.resize(static_cast<std::size_t>(layer.in) * layer.out);
            for (auto& w : layer.weights) w = rng.uniform_symmetric(limit);
            layer.biases.assign(static_cast<std::size_t>(layer.out), 0.0);
            layers_.push_back(std::move(layer));
        }
    }

    int input_dim() const { return layers_.front().in; }
    int output_dim() const { return layers_.back().out; }
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    std::vector<int> dims() const {
        std::vector<int> d{layers_.front().in};
        for (const auto& l : layers_) d.push_back(l.out);
        return d;
    }

    std::vector<double> forward(const std::vector<double>& input) const {
        if (static_cast<int>(input.size()) != input_dim())
            throw std::invalid_argument("input length mismatch");
        std::vector<double> x = input;
        std::vector<double> y;
        for (const auto& layer : layers_) {
            y.assign(static_cast<std::size_t>(layer.out), 0.0);
            for (int o = 0; o < layer.out; ++o) {
                const double* wrow = layer.weights.data() + static_cast<std::size_t>(o) * layer.in;
                double acc = layer.biases[static_cast<std::size_t>(o)];
                for (int i = 0; i < layer.in; ++i) acc += wrow[i] * x[static_cast<std::size_t>(i)];
                y[static_cast<std::size_t>(o)] = layer.relu ? std::max(0.0, acc) : acc;
            }
            x.swap(y);
        }
        return x;
    }

    bool same_architecture(const Mlp& other) const {
        if (layers_.size() != other.layers_.size()) return false;
        for (std::size_t l = 0; l < layers_.size(); ++l)
            if (layers_[l].in != other.layers_[l].in || layers_[l].out != other.layers_[l].out ||
                layers_[l].relu != other.layers_[l].relu)
                return false;
        return true;
    }

private:
    std::vector<Layer> layers_;
};

// Copies parameters from src into dst; architectures must match exactly.
inline void copy_parameters(const Mlp& src, Mlp& dst) {
    if (!src.same_architecture(dst)) throw std::invalid_argument("architecture mismatch");
    for (std::size_t l = 0; l < src.layers().size(); ++l) {
        dst.layers()[l].weights = src.layers()[l].weights;
        dst.layers()[l].biases = src.layers()[l].biases;
    }
}

// Per-parameter partials of a scalar loss, mirroring the Mlp layout.
struct GradientBundle {
    struct LayerGrad {
        std::vector<double> weights;
        std::vector<double> biases;
    };
    std::vector<LayerGrad> layers;

    static GradientBundle zeros_like(const Mlp& net) {
        GradientBundle g;
        for (const auto& l : net.layers())
            g.layers.push_back({std::vector<double>(l.weights.size(), 0.0),
                                std::vector<double>(l.biases.size(), 0.0)});
        return g;
    }

    void scale(double factor) {
        for (auto& l : layers) {
            for (auto& w : l.weights) w *= factor;
            for (auto& b : l.biases) b *= factor;
        }
    }
};

// Forward pass retaining pre-activation inputs per layer, then reverse-mode
// backprop of an arbitrary gradient on the output vector into `grads`
// (accumulated, not overwritten). Returns the network output.
inline std::vector<double> backprop_accumulate(const Mlp& net, const std::vector<double>& input,
                                               const std::vector<double>& output_grad,
                                               GradientBundle& grads) {
    const auto& layers = net.layers();
    std::vector<std::vector<double>> activations;  // post-activation per layer, incl. input
    activations.reserve(layers.size() + 1);
    activations.push_back(input);
    for (const auto& layer : layers) {
        const auto& x = activations.back();
        std::vector<double> y(static_cast<std::size_t>(layer.out));
        for (int o = 0; o < layer.out; ++o) {
            const double* wrow = layer.weights.data() + static_cast<std::size_t>(o) * layer.in;
            double acc = layer.biases[static_cast<std::size_t>(o)];
            for (int i = 0; i < layer.in; ++i) acc += wrow[i] * x[static_cast<std::size_t>(i)];
            y[static_cast<std::size_t>(o)] = layer.relu ? std::max(0.0, acc) : acc;
        }
        activations.push_back(std::move(y));
    }

    std::vector<double> delta = output_grad;
    for (std::size_t l = layers.size(); l-- > 0;) {
        const auto& layer = layers[l];
        const auto& x = activations[l];
        const auto& y = activations[l + 1];
        auto& g = grads.layers[l];
        if (layer.relu) {
            for (int o = 0; o < layer.out; ++o)
                if (y[static_cast<std::size_t>(o)] <= 0.0) delta[static_cast<std::size_t>(o)] = 0.0;
        }
        std::vector<double> prev(static_cast<std::size_t>(layer.in), 0.0);
        for (int o = 0; o < layer.out; ++o) {
            double d = delta[static_cast<std::size_t>(o)];
            if (d == 0.0) continue;
            g.biases[static_cast<std::size_t>(o)] += d;
            double* gw = g.weights.data() + static_cast<std::size_t>(o) * layer.in;
            const double* wrow = layer.weights.data() + static_cast<std::size_t>(o) * layer.in;
            for (int i = 0; i < layer.in; ++i) {
                gw[i] += d * x[static_cast<std::size_t>(i)];
                prev[static_cast<std::size_t>(i)] += d * wrow[i];
            }
        }
        delta.swap(prev);
    }
    return activations.back();
}

// Squared-difference loss on a single output coordinate:
// loss = (target - net(input)[action_index])^2.
inline std::pair<double, GradientBundle> loss_and_gradients(const Mlp& net,
                                                            const std::vector<double>& input,
                                                            int action_index, double target) {
    if (action_index < 0 || action_index >= net.output_dim())
        throw std::out_of_range("action index out of range");
    auto out = net.forward(input);
    double q = out[static_cast<std::size_t>(action_index)];
    std::vector<double> ograd(out.size(), 0.0);
    ograd[static_cast<std::size_t>(action_index)] = -2.0 * (target - q);
    GradientBundle grads = GradientBundle::zeros_like(net);
    backprop_accumulate(net, input, ograd, grads);
    double diff = target - q;
    return {diff * diff, grads};
}

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long t = 0;
    GradientBundle m;  // first moments
    GradientBundle v;  // second moments

    static AdamState for_net(const Mlp& net, double lr = 1e-3) {
        AdamState s;
        s.lr = lr;
        s.m = GradientBundle::zeros_like(net);
        s.v = GradientBundle::zeros_like(net);
        return s;
    }
};

inline void adam_step(Mlp& net, AdamState& opt, const GradientBundle& grads) {
    if (grads.layers.size() != net.layers().size()) throw std::invalid_argument("gradient shape mismatch");
    opt.t += 1;
    double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.t));
    double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.t));
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        auto& layer = net.layers()[l];
        auto update = [&](std::vector<double>& params, const std::vector<double>& g,
                          std::vector<double>& m, std::vector<double>& v) {
            if (g.size() != params.size()) throw std::invalid_argument("gradient shape mismatch");
            for (std::size_t i = 0; i < params.size(); ++i) {
                m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g[i];
                v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g[i] * g[i];
                double mhat = m[i] / bc1;
                double vhat = v[i] / bc2;
                params[i] -= opt.lr * mhat / (std::sqrt(vhat) + opt.epsilon);
            }
        };
        update(layer.weights, grads.layers[l].weights, opt.m.layers[l].weights, opt.v.layers[l].weights);
        update(layer.biases, grads.layers[l].biases, opt.m.layers[l].biases, opt.v.layers[l].biases);
    }
}

// --- JSON checkpointing (bit-exact double round-trip via nlohmann) ---

inline nlohmann::json mlp_to_json(const Mlp& net) {
    nlohmann::json j;
    j["dims"] = net.dims();
    j["layers"] = nlohmann::json::array();
    for (const auto& l : net.layers()) {
        j["layers"].push_back({{"weights", l.weights}, {"biases", l.biases}, {"relu", l.relu}});
    }
    return j;
}

inline Mlp mlp_from_json(const nlohmann::json& j) {
    std::vector<int> dims = j.at("dims").get<std::vector<int>>();
    Rng dummy(0);
    Mlp net(dims, dummy);
    const auto& jl = j.at("layers");
    if (jl.size() != net.layers().size()) throw std::runtime_error("checkpoint layer count mismatch");
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        net.layers()[l].weights = jl[l].at("weights").get<std::vector<double>>();
        net.layers()[l].biases = jl[l].at("biases").get<std::vector<double>>();
        net.layers()[l].relu = jl[l].at("relu").get<bool>();
        if (net.layers()[l].weights.size() !=
                static_cast<std::size_t>(net.layers()[l].in) * net.layers()[l].out ||
            net.layers()[l].biases.size() != static_cast<std::size_t>(net.layers()[l].out))
            throw std::runtime_error("checkpoint shape mismatch");
    }
    return net;
}

inline nlohmann::json adam_to_json(const AdamState& s) {
    nlohmann::json j;
    j["lr"] = s.lr;
    j["beta1"] = s.beta1;
    j["beta2"] = s.beta2;
    j["epsilon"] = s.epsilon;
    j["t"] = s.t;
    auto bundle = [](const GradientBundle& g) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& l : g.layers) arr.push_back({{"weights", l.weights}, {"biases", l.biases}});
        return arr;
    };
    j["m"] = bundle(s.m);
    j["v"] = bundle(s.v);
    return j;
}

inline AdamState adam_from_json(const nlohmann::json& j, const Mlp& net) {
    AdamState s = AdamState::for_net(net);
    s.lr = j.at("lr").get<double>();
    s.beta1 = j.at("beta1").get<double>();
    s.beta2 = j.at("beta2").get<double>();
    s.epsilon = j.at("epsilon").get<double>();
    s.t = j.at("t").get<long>();
    auto bundle = [&](GradientBundle& g, const nlohmann::json& arr) {
        for (std::size_t l = 0; l < g.layers.size(); ++l) {
            g.layers[l].weights = arr[l].at("weights").get<std::vector<double>>();
            g.layers[l].biases = arr[l].at("biases").get<std::vector<double>>();
        }
    };
    bundle(s.m, j.at("m"));
    bundle(s.v, j.at("v"));
    return s;
}

}  // namespace tsc
