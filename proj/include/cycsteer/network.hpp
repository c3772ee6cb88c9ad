#ifndef CYCSTEER_NETWORK_HPP
#define CYCSTEER_NETWORK_HPP

#include <cstdio>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cycsteer/layers.hpp"
#include "cycsteer/rng.hpp"
#include "cycsteer/tensor.hpp"

namespace cycsteer {

enum class Role : uint8_t {
    regressor,
    generator_s2t,
    generator_t2s,
    discriminator_s2t,
    discriminator_t2s,
    discriminator_shared,
};

std::string to_string(Role r);
Role role_from_string(const std::string& s);

enum class Mode : uint8_t { train, eval };

struct NetworkSpec {
    Role role{};
    std::vector<LayerSpec> layers;
    TensorShape input_shape{1, 3, 80, 160};

    bool operator==(const NetworkSpec&) const = default;
};

// Layer stacks per the three archetypes: the regressor is a 3-conv-block
// trunk plus fc(1); discriminators share the trunk and end in fc(100), fc(2);
// generators mirror the trunk with unpool/deconv blocks back to 3 channels.
// `act` selects the nonlinearity used throughout (the final generator block
// stays linear so outputs live in normalized-image space).
NetworkSpec build_network(Role role, Activation act = Activation::leaky_relu,
                          int height = 80, int width = 160);

// Same stacks with conv channels (24,48,64) and the discriminator hidden
// width divided by `divisor`; used for fast small-scale runs and checks.
NetworkSpec build_network_scaled(Role role, Activation act, int height, int width, int divisor);

// Per-layer input shapes for a given batch size, validating the stack
// (even spatial sizes at stride-2 pools, pool/unpool pairing). Element i is
// the input to layer i; the last element is the output shape.
std::vector<TensorShape> infer_shapes(const NetworkSpec& spec, int batch);

template <typename T>
struct ParameterSet {
    std::map<std::string, Tensor<T>> entries;

    Tensor<T>& at(const std::string& name) {
        auto it = entries.find(name);
        if (it == entries.end()) throw std::out_of_range("no parameter entry: " + name);
        return it->second;
    }
    const Tensor<T>& at(const std::string& name) const {
        auto it = entries.find(name);
        if (it == entries.end()) throw std::out_of_range("no parameter entry: " + name);
        return it->second;
    }
    bool operator==(const ParameterSet&) const = default;
};

template <typename T>
struct GradientSet {
    std::map<std::string, Tensor<T>> grads;

    Tensor<T>& accumulator(const std::string& name, const TensorShape& shape) {
        auto it = grads.find(name);
        if (it == grads.end()) it = grads.emplace(name, Tensor<T>(shape)).first;
        return it->second;
    }
};

inline std::string layer_param_prefix(int index, LayerKind kind) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "L%02d.", index);
    std::string tag;
    switch (kind) {
        case LayerKind::conv: tag = "conv"; break;
        case LayerKind::deconv: tag = "deconv"; break;
        case LayerKind::fully_connected: tag = "fc"; break;
        case LayerKind::batch_norm: tag = "bn"; break;
        default: tag = "none"; break;
    }
    return std::string(buf) + tag + ".";
}

// Xavier/Glorot uniform weights from a seeded stream, zero biases,
// batch-norm scale 1 / shift 0 with fresh running statistics.
template <typename T>
ParameterSet<T> init_parameters(const NetworkSpec& spec, uint64_t seed) {
    ParameterSet<T> params;
    Rng rng(seed);
    auto shapes = infer_shapes(spec, 1);
    for (size_t i = 0; i < spec.layers.size(); ++i) {
        const auto& l = spec.layers[i];
        const auto& in = shapes[i];
        const std::string prefix = layer_param_prefix(static_cast<int>(i), l.kind);
        switch (l.kind) {
            case LayerKind::conv:
            case LayerKind::deconv: {
                const int fan_in = in.channels * l.window * l.window;
                const int fan_out = l.channels_out * l.window * l.window;
                const double limit = std::sqrt(6.0 / (fan_in + fan_out));
                Tensor<T> w(l.channels_out, in.channels, l.window, l.window);
                for (int64_t j = 0; j < w.numel(); ++j)
                    w[j] = static_cast<T>(rng.uniform(-limit, limit));
                params.entries.emplace(prefix + "weight", std::move(w));
                params.entries.emplace(prefix + "bias", Tensor<T>(l.channels_out, 1, 1, 1));
                break;
            }
            case LayerKind::fully_connected: {
                const int fan_in = static_cast<int>(in.per_sample());
                const int fan_out = l.channels_out;
                const double limit = std::sqrt(6.0 / (fan_in + fan_out));
                Tensor<T> w(l.channels_out, fan_in, 1, 1);
                for (int64_t j = 0; j < w.numel(); ++j)
                    w[j] = static_cast<T>(rng.uniform(-limit, limit));
                params.entries.emplace(prefix + "weight", std::move(w));
                params.entries.emplace(prefix + "bias", Tensor<T>(l.channels_out, 1, 1, 1));
                break;
            }
            case LayerKind::batch_norm: {
                Tensor<T> scale(in.channels, 1, 1, 1), var(in.channels, 1, 1, 1);
                scale.fill(T(1));
                var.fill(T(1));
                params.entries.emplace(prefix + "scale", std::move(scale));
                params.entries.emplace(prefix + "shift", Tensor<T>(in.channels, 1, 1, 1));
                params.entries.emplace(prefix + "running_mean", Tensor<T>(in.channels, 1, 1, 1));
                params.entries.emplace(prefix + "running_var", std::move(var));
                break;
            }
            default:
                break;
        }
    }
    return params;
}

// Runs the layer stack. Train mode uses batch statistics and, when `trace`
// is given, records the operation sequence for the reverse pass; eval mode
// uses running statistics and is a pure function of (params, input).
// `update_running` lets callers (gradient checking) run train-mode
// statistics without mutating the running estimates.
template <typename T>
Tensor<T> forward(const NetworkSpec& spec, ParameterSet<T>& params, const Tensor<T>& input,
                  Mode mode, ForwardTrace<T>* trace = nullptr, bool update_running = true) {
    if (trace && mode != Mode::train)
        throw std::logic_error("forward: gradient tape requires train mode");
    const auto& is = spec.input_shape;
    if (input.shape().channels != is.channels || input.shape().height != is.height ||
        input.shape().width != is.width)
        throw std::invalid_argument("network " + to_string(spec.role) + ": input shape " +
                                    input.shape().str() + " does not match spec input " +
                                    is.str());
    auto shapes = infer_shapes(spec, input.shape().batch);
    if (trace) {
        trace->layers.clear();
        trace->layers.resize(spec.layers.size());
    }

    // Pool argmax indices pushed by maxpool, popped by the paired unpool.
    std::vector<std::vector<int32_t>> local_store;
    local_store.reserve(spec.layers.size());
    struct PoolRef {
        const std::vector<int32_t>* indices;
        int layer;
    };
    std::vector<PoolRef> pool_stack;

    auto cur = std::make_shared<Tensor<T>>(input);
    for (size_t i = 0; i < spec.layers.size(); ++i) {
        const auto& l = spec.layers[i];
        const std::string prefix = layer_param_prefix(static_cast<int>(i), l.kind);
        auto out = std::make_shared<Tensor<T>>(shapes[i + 1]);
        switch (l.kind) {
            case LayerKind::conv:
            case LayerKind::deconv:
                conv_forward(*cur, params.at(prefix + "weight"), params.at(prefix + "bias"), *out);
                break;
            case LayerKind::maxpool: {
                std::vector<int32_t>* idx;
                if (trace) {
                    idx = &trace->layers[i].pool_indices;
                } else {
                    local_store.emplace_back();
                    idx = &local_store.back();
                }
                maxpool_forward(*cur, l.stride, *out, *idx);
                pool_stack.push_back({idx, static_cast<int>(i)});
                break;
            }
            case LayerKind::unpool: {
                if (pool_stack.empty())
                    throw std::invalid_argument("layer " + std::to_string(i) +
                                                " (unpool): no paired maxpool indices");
                const auto ref = pool_stack.back();
                pool_stack.pop_back();
                if (static_cast<int64_t>(ref.indices->size()) != cur->numel())
                    throw std::invalid_argument("layer " + std::to_string(i) +
                                                " (unpool): paired pool shape mismatch");
                unpool_forward(*cur, *ref.indices, *out);
                if (trace) trace->layers[i].unpool_src_layer = ref.layer;
                break;
            }
            case LayerKind::fully_connected:
                fc_forward(*cur, params.at(prefix + "weight"), params.at(prefix + "bias"), *out);
                break;
            case LayerKind::batch_norm: {
                if (mode == Mode::train) {
                    auto xhat = std::make_shared<Tensor<T>>(cur->shape());
                    std::vector<T> mean, inv_std;
                    Tensor<T>* rm = update_running ? &params.at(prefix + "running_mean") : nullptr;
                    Tensor<T>* rv = update_running ? &params.at(prefix + "running_var") : nullptr;
                    batch_norm_forward_train(*cur, params.at(prefix + "scale"),
                                             params.at(prefix + "shift"), *out, mean, inv_std,
                                             *xhat, rm, rv);
                    if (trace) {
                        trace->layers[i].bn_mean = std::move(mean);
                        trace->layers[i].bn_inv_std = std::move(inv_std);
                        trace->layers[i].bn_xhat = xhat;
                    }
                } else {
                    batch_norm_forward_eval(*cur, params.at(prefix + "scale"),
                                            params.at(prefix + "shift"),
                                            params.at(prefix + "running_mean"),
                                            params.at(prefix + "running_var"), *out);
                }
                break;
            }
            case LayerKind::activation:
                activation_forward(*cur, l.activation_kind, static_cast<T>(l.leaky_slope), *out);
                break;
        }
        if (trace) {
            trace->layers[i].input = cur;
            trace->layers[i].output = out;
        }
        cur = out;
    }
    return *cur;
}

// Reverse-mode sweep over a recorded trace. Parameter gradients accumulate
// into `grads` (so several loss terms can share one GradientSet); returns the
// gradient w.r.t. the network input. `need_param_grads=false` turns the
// network into a frozen pass-through (adversary fixed during the other
// player's update); `need_input_grad=false` skips the input gradient of the
// first layer.
template <typename T>
Tensor<T> backward(const NetworkSpec& spec, const ParameterSet<T>& params,
                   const ForwardTrace<T>& trace, const Tensor<T>& grad_output,
                   GradientSet<T>& grads, bool need_input_grad = true,
                   bool need_param_grads = true) {
    if (trace.layers.size() != spec.layers.size())
        throw std::logic_error("backward: trace does not match network spec");
    Tensor<T> grad = grad_output;
    for (int i = static_cast<int>(spec.layers.size()) - 1; i >= 0; --i) {
        const auto& l = spec.layers[i];
        const auto& cache = trace.layers[i];
        const std::string prefix = layer_param_prefix(i, l.kind);
        const bool want_input = need_input_grad || i > 0;
        Tensor<T> grad_in(cache.input->shape());
        switch (l.kind) {
            case LayerKind::conv:
            case LayerKind::deconv: {
                const auto& w = params.at(prefix + "weight");
                Tensor<T>* gw = nullptr;
                Tensor<T>* gb = nullptr;
                if (need_param_grads) {
                    gw = &grads.accumulator(prefix + "weight", w.shape());
                    gb = &grads.accumulator(prefix + "bias",
                                            params.at(prefix + "bias").shape());
                }
                conv_backward(*cache.input, w, grad, want_input ? &grad_in : nullptr, gw, gb);
                break;
            }
            case LayerKind::maxpool:
                maxpool_backward(cache.input->shape(), cache.pool_indices, grad, grad_in);
                break;
            case LayerKind::unpool:
                unpool_backward(cache.input->shape(),
                                trace.layers[cache.unpool_src_layer].pool_indices, grad, grad_in);
                break;
            case LayerKind::fully_connected: {
                const auto& w = params.at(prefix + "weight");
                Tensor<T>* gw = nullptr;
                Tensor<T>* gb = nullptr;
                if (need_param_grads) {
                    gw = &grads.accumulator(prefix + "weight", w.shape());
                    gb = &grads.accumulator(prefix + "bias",
                                            params.at(prefix + "bias").shape());
                }
                fc_backward(*cache.input, w, grad, want_input ? &grad_in : nullptr, gw, gb);
                break;
            }
            case LayerKind::batch_norm: {
                Tensor<T>* gs = nullptr;
                Tensor<T>* gh = nullptr;
                if (need_param_grads) {
                    gs = &grads.accumulator(prefix + "scale",
                                            params.at(prefix + "scale").shape());
                    gh = &grads.accumulator(prefix + "shift",
                                            params.at(prefix + "shift").shape());
                }
                batch_norm_backward(grad, *cache.bn_xhat, params.at(prefix + "scale"),
                                    cache.bn_inv_std, want_input ? &grad_in : nullptr, gs, gh);
                break;
            }
            case LayerKind::activation:
                activation_backward(*cache.input, l.activation_kind,
                                    static_cast<T>(l.leaky_slope), grad, grad_in);
                break;
        }
        grad = std::move(grad_in);
    }
    return grad;
}

}  // namespace cycsteer

#endif
