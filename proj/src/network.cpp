#include "cycsteer/network.hpp"

namespace cycsteer {

std::string to_string(LayerKind k) {
    switch (k) {
        case LayerKind::conv: return "conv";
        case LayerKind::deconv: return "deconv";
        case LayerKind::maxpool: return "maxpool";
        case LayerKind::unpool: return "unpool";
        case LayerKind::fully_connected: return "fully_connected";
        case LayerKind::batch_norm: return "batch_norm";
        case LayerKind::activation: return "activation";
    }
    return "?";
}

std::string to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::leaky_relu: return "leaky_relu";
        case Activation::none: return "none";
    }
    return "?";
}

std::string to_string(Role r) {
    switch (r) {
        case Role::regressor: return "regressor";
        case Role::generator_s2t: return "generator_s2t";
        case Role::generator_t2s: return "generator_t2s";
        case Role::discriminator_s2t: return "discriminator_s2t";
        case Role::discriminator_t2s: return "discriminator_t2s";
        case Role::discriminator_shared: return "discriminator_shared";
    }
    return "?";
}

Role role_from_string(const std::string& s) {
    if (s == "regressor") return Role::regressor;
    if (s == "generator_s2t") return Role::generator_s2t;
    if (s == "generator_t2s") return Role::generator_t2s;
    if (s == "discriminator_s2t") return Role::discriminator_s2t;
    if (s == "discriminator_t2s") return Role::discriminator_t2s;
    if (s == "discriminator_shared") return Role::discriminator_shared;
    throw std::invalid_argument("unknown network role: " + s);
}

namespace {

LayerSpec conv(int ch, int window) { return {LayerKind::conv, ch, window, 1}; }
LayerSpec deconv(int ch, int window) { return {LayerKind::deconv, ch, window, 1}; }
LayerSpec pool(int stride) { return {LayerKind::maxpool, 0, 2, stride}; }
LayerSpec unpool(int stride) { return {LayerKind::unpool, 0, 2, stride}; }
LayerSpec fc(int units) { return {LayerKind::fully_connected, units, 0, 1}; }
LayerSpec bn() { return {LayerKind::batch_norm, 0, 0, 1}; }
LayerSpec act(Activation a) { return {LayerKind::activation, 0, 0, 1, a}; }

// Shared 3-block encoder trunk: conv24/5x5, conv48/5x5, conv64/3x3, each
// batch-normalized, with 2x2 pools (strides 2, 2, 1).
void append_trunk(std::vector<LayerSpec>& ls, Activation a, int div) {
    ls.push_back(conv(std::max(1, 24 / div), 5));
    ls.push_back(bn());
    ls.push_back(act(a));
    ls.push_back(pool(2));
    ls.push_back(conv(std::max(1, 48 / div), 5));
    ls.push_back(bn());
    ls.push_back(act(a));
    ls.push_back(pool(2));
    ls.push_back(conv(std::max(1, 64 / div), 3));
    ls.push_back(bn());
    ls.push_back(act(a));
    ls.push_back(pool(1));
}

}  // namespace

NetworkSpec build_network_scaled(Role role, Activation a, int height, int width, int div) {
    NetworkSpec spec;
    spec.role = role;
    spec.input_shape = {1, 3, height, width};
    auto& ls = spec.layers;
    switch (role) {
        case Role::regressor:
            append_trunk(ls, a, div);
            ls.push_back(fc(1));
            break;
        case Role::discriminator_s2t:
        case Role::discriminator_t2s:
        case Role::discriminator_shared:
            append_trunk(ls, a, div);
            ls.push_back(fc(std::max(2, 100 / div)));
            ls.push_back(act(a));
            ls.push_back(fc(2));
            break;
        case Role::generator_s2t:
        case Role::generator_t2s:
            append_trunk(ls, a, div);
            // decoder mirrors the trunk; unpools reuse the paired pool indices
            ls.push_back(unpool(1));
            ls.push_back(deconv(std::max(1, 48 / div), 3));
            ls.push_back(bn());
            ls.push_back(act(a));
            ls.push_back(unpool(2));
            ls.push_back(deconv(std::max(1, 24 / div), 5));
            ls.push_back(bn());
            ls.push_back(act(a));
            ls.push_back(unpool(2));
            ls.push_back(deconv(3, 3));
            ls.push_back(bn());
            break;
    }
    for (size_t i = 0; i < ls.size(); ++i) validate_layer(ls[i], static_cast<int>(i));
    return spec;
}

NetworkSpec build_network(Role role, Activation a, int height, int width) {
    return build_network_scaled(role, a, height, width, 1);
}

std::vector<TensorShape> infer_shapes(const NetworkSpec& spec, int batch) {
    std::vector<TensorShape> shapes;
    shapes.reserve(spec.layers.size() + 1);
    TensorShape cur = spec.input_shape;
    cur.batch = batch;
    shapes.push_back(cur);
    std::vector<TensorShape> pool_stack;  // input shapes of pending maxpools
    for (size_t i = 0; i < spec.layers.size(); ++i) {
        const auto& l = spec.layers[i];
        auto fail = [&](const std::string& why) {
            throw std::invalid_argument("layer " + std::to_string(i) + " (" + to_string(l.kind) +
                                        "): " + why + " at " + cur.str());
        };
        switch (l.kind) {
            case LayerKind::conv:
            case LayerKind::deconv:
                cur.channels = l.channels_out;
                break;
            case LayerKind::maxpool:
                pool_stack.push_back(cur);
                if (l.stride == 2) {
                    if (cur.height % 2 != 0 || cur.width % 2 != 0)
                        fail("stride-2 pooling needs even spatial size");
                    cur.height /= 2;
                    cur.width /= 2;
                }
                break;
            case LayerKind::unpool: {
                if (pool_stack.empty()) fail("no maxpool to pair with");
                TensorShape paired = pool_stack.back();
                pool_stack.pop_back();
                if (paired.channels != cur.channels)
                    fail("paired pool had " + std::to_string(paired.channels) + " channels");
                cur.height = paired.height;
                cur.width = paired.width;
                break;
            }
            case LayerKind::fully_connected:
                cur = {cur.batch, l.channels_out, 1, 1};
                break;
            case LayerKind::batch_norm:
            case LayerKind::activation:
                break;
        }
        shapes.push_back(cur);
    }
    return shapes;
}

}  // namespace cycsteer
