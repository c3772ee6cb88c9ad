#ifndef CYCSTEER_LAYERS_HPP
#define CYCSTEER_LAYERS_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cycsteer/gemm.hpp"
#include "cycsteer/tensor.hpp"

namespace cycsteer {

enum class LayerKind : uint8_t {
    conv,
    deconv,
    maxpool,
    unpool,
    fully_connected,
    batch_norm,
    activation,
};

enum class Activation : uint8_t { relu, leaky_relu, none };

std::string to_string(LayerKind k);
std::string to_string(Activation a);

// One entry of a declarative layer stack. Convolutions and deconvolutions are
// stride 1 with same-padding; spatial size changes only through pool/unpool.
struct LayerSpec {
    LayerKind kind{};
    int channels_out = 0;   // conv / deconv / fully_connected
    int window = 0;         // conv / deconv / maxpool / unpool
    int stride = 1;         // maxpool / unpool
    Activation activation_kind = Activation::none;
    double leaky_slope = 0.2;

    bool operator==(const LayerSpec&) const = default;
};

inline void validate_layer(const LayerSpec& l, int index) {
    auto fail = [&](const std::string& why) {
        throw std::invalid_argument("layer " + std::to_string(index) + " (" + to_string(l.kind) +
                                    "): " + why);
    };
    switch (l.kind) {
        case LayerKind::conv:
        case LayerKind::deconv:
            if (l.window != 3 && l.window != 5) fail("window must be 3 or 5");
            if (l.channels_out < 1) fail("channels_out must be >= 1");
            break;
        case LayerKind::maxpool:
        case LayerKind::unpool:
            if (l.window != 2) fail("window must be 2");
            if (l.stride != 1 && l.stride != 2) fail("stride must be 1 or 2");
            break;
        case LayerKind::fully_connected:
            if (l.channels_out < 1) fail("units must be >= 1");
            break;
        case LayerKind::batch_norm:
        case LayerKind::activation:
            break;
    }
}

// Per-layer forward cache consumed by the reverse pass.
template <typename T>
struct LayerCache {
    std::shared_ptr<Tensor<T>> input;
    std::shared_ptr<Tensor<T>> output;
    std::vector<int32_t> pool_indices;  // maxpool: argmax offsets per (b,c) plane
    int unpool_src_layer = -1;          // unpool: index of the paired maxpool layer
    std::vector<T> bn_mean, bn_inv_std;      // batch statistics used in the forward
    std::shared_ptr<Tensor<T>> bn_xhat;
};

// Record of one train-mode forward pass through a network: the operation
// sequence is the spec's layer list, the cache holds everything the reverse
// sweep needs.
template <typename T>
struct ForwardTrace {
    std::vector<LayerCache<T>> layers;
};

namespace detail {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;

template <typename T>
void im2col(const T* src, int channels, int height, int width, int window, T* col) {
    const int pad = (window - 1) / 2;
    const int hw = height * width;
    int64_t r = 0;
    for (int c = 0; c < channels; ++c) {
        for (int kh = 0; kh < window; ++kh) {
            for (int kw = 0; kw < window; ++kw, ++r) {
                T* dst = col + r * hw;
                const T* plane = src + static_cast<int64_t>(c) * hw;
                for (int h = 0; h < height; ++h) {
                    const int sh = h + kh - pad;
                    if (sh < 0 || sh >= height) {
                        std::fill(dst + h * width, dst + (h + 1) * width, T(0));
                        continue;
                    }
                    const T* row = plane + sh * width;
                    T* out = dst + h * width;
                    const int shift = kw - pad;
                    const int lo = std::max(0, -shift);
                    const int hi = std::min(width, width - shift);
                    for (int w = 0; w < lo; ++w) out[w] = T(0);
                    for (int w = lo; w < hi; ++w) out[w] = row[w + shift];
                    for (int w = hi; w < width; ++w) out[w] = T(0);
                }
            }
        }
    }
}

template <typename T>
void col2im(const T* col, int channels, int height, int width, int window, T* dst) {
    const int pad = (window - 1) / 2;
    const int hw = height * width;
    int64_t r = 0;
    for (int c = 0; c < channels; ++c) {
        for (int kh = 0; kh < window; ++kh) {
            for (int kw = 0; kw < window; ++kw, ++r) {
                const T* src = col + r * hw;
                T* plane = dst + static_cast<int64_t>(c) * hw;
                const int shift = kw - pad;
                for (int h = 0; h < height; ++h) {
                    const int sh = h + kh - pad;
                    if (sh < 0 || sh >= height) continue;
                    T* row = plane + sh * width;
                    const int lo = std::max(0, -shift);
                    const int hi = std::min(width, width - shift);
                    for (int w = lo; w < hi; ++w) row[w + shift] += src[h * width + w];
                }
            }
        }
    }
}

}  // namespace detail

// ---- convolution (stride 1, same padding) ----

template <typename T>
void conv_forward(const Tensor<T>& in, const Tensor<T>& weight, const Tensor<T>& bias,
                  Tensor<T>& out) {
    const auto& s = in.shape();
    const int c_out = weight.shape().batch;
    const int c_in = weight.shape().channels;
    const int k = weight.shape().height;
    const int hw = s.height * s.width;
    const int kk = c_in * k * k;
    std::vector<T> col(static_cast<size_t>(kk) * hw);
    for (int b = 0; b < s.batch; ++b) {
        detail::im2col(in.data() + static_cast<int64_t>(b) * s.per_sample(), c_in, s.height,
                       s.width, k, col.data());
        T* dst = out.data() + static_cast<int64_t>(b) * out.shape().per_sample();
        gemm(false, false, c_out, hw, kk, T(1), weight.data(), kk, col.data(), hw, T(0), dst, hw);
        for (int c = 0; c < c_out; ++c) {
            const T bv = bias[c];
            T* row = dst + static_cast<int64_t>(c) * hw;
            for (int i = 0; i < hw; ++i) row[i] += bv;
        }
    }
}

template <typename T>
void conv_backward(const Tensor<T>& in, const Tensor<T>& weight, const Tensor<T>& grad_out,
                   Tensor<T>* grad_in, Tensor<T>* grad_weight, Tensor<T>* grad_bias) {
    const auto& s = in.shape();
    const int c_out = weight.shape().batch;
    const int c_in = weight.shape().channels;
    const int k = weight.shape().height;
    const int hw = s.height * s.width;
    const int kk = c_in * k * k;
    std::vector<T> col(static_cast<size_t>(kk) * hw);
    std::vector<T> dcol;
    if (grad_in) dcol.resize(static_cast<size_t>(kk) * hw);
    for (int b = 0; b < s.batch; ++b) {
        const T* go = grad_out.data() + static_cast<int64_t>(b) * grad_out.shape().per_sample();
        if (grad_weight) {
            detail::im2col(in.data() + static_cast<int64_t>(b) * s.per_sample(), c_in, s.height,
                           s.width, k, col.data());
            gemm(false, true, c_out, kk, hw, T(1), go, hw, col.data(), hw, T(1),
                 grad_weight->data(), kk);
        }
        if (grad_bias) {
            for (int c = 0; c < c_out; ++c) {
                T acc = T(0);
                const T* row = go + static_cast<int64_t>(c) * hw;
                for (int i = 0; i < hw; ++i) acc += row[i];
                (*grad_bias)[c] += acc;
            }
        }
        if (grad_in) {
            gemm(true, false, kk, hw, c_out, T(1), weight.data(), kk, go, hw, T(0), dcol.data(),
                 hw);
            detail::col2im(dcol.data(), c_in, s.height, s.width, k,
                           grad_in->data() + static_cast<int64_t>(b) * s.per_sample());
        }
    }
}

// ---- max pooling ----

template <typename T>
void maxpool_forward(const Tensor<T>& in, int stride, Tensor<T>& out,
                     std::vector<int32_t>& indices) {
    const auto& s = in.shape();
    const int oh = out.shape().height, ow = out.shape().width;
    indices.resize(static_cast<size_t>(out.numel()));
    int64_t oi = 0;
    for (int b = 0; b < s.batch; ++b) {
        for (int c = 0; c < s.channels; ++c) {
            const T* plane =
                in.data() + (static_cast<int64_t>(b) * s.channels + c) * s.height * s.width;
            for (int h = 0; h < oh; ++h) {
                for (int w = 0; w < ow; ++w, ++oi) {
                    const int h0 = h * stride, w0 = w * stride;
                    T best = -std::numeric_limits<T>::infinity();
                    int32_t best_idx = h0 * s.width + w0;
                    for (int dh = 0; dh < 2; ++dh) {
                        const int hh = h0 + dh;
                        if (hh >= s.height) break;
                        for (int dw = 0; dw < 2; ++dw) {
                            const int ww = w0 + dw;
                            if (ww >= s.width) break;
                            const T v = plane[hh * s.width + ww];
                            if (v > best) {
                                best = v;
                                best_idx = hh * s.width + ww;
                            }
                        }
                    }
                    out[oi] = best;
                    indices[oi] = best_idx;
                }
            }
        }
    }
}

template <typename T>
void maxpool_backward(const TensorShape& in_shape, const std::vector<int32_t>& indices,
                      const Tensor<T>& grad_out, Tensor<T>& grad_in) {
    const int64_t out_plane = static_cast<int64_t>(grad_out.shape().height) * grad_out.shape().width;
    const int64_t in_plane = static_cast<int64_t>(in_shape.height) * in_shape.width;
    const int64_t planes = static_cast<int64_t>(in_shape.batch) * in_shape.channels;
    for (int64_t p = 0; p < planes; ++p) {
        const T* go = grad_out.data() + p * out_plane;
        T* gi = grad_in.data() + p * in_plane;
        const int32_t* idx = indices.data() + p * out_plane;
        for (int64_t i = 0; i < out_plane; ++i) gi[idx[i]] += go[i];
    }
}

// ---- max unpooling (scatter to the paired pool's argmax positions) ----

template <typename T>
void unpool_forward(const Tensor<T>& in, const std::vector<int32_t>& indices, Tensor<T>& out) {
    out.fill(T(0));
    const int64_t in_plane = static_cast<int64_t>(in.shape().height) * in.shape().width;
    const int64_t out_plane = static_cast<int64_t>(out.shape().height) * out.shape().width;
    const int64_t planes = static_cast<int64_t>(in.shape().batch) * in.shape().channels;
    for (int64_t p = 0; p < planes; ++p) {
        const T* src = in.data() + p * in_plane;
        T* dst = out.data() + p * out_plane;
        const int32_t* idx = indices.data() + p * in_plane;
        for (int64_t i = 0; i < in_plane; ++i) dst[idx[i]] += src[i];
    }
}

template <typename T>
void unpool_backward(const TensorShape& in_shape, const std::vector<int32_t>& indices,
                     const Tensor<T>& grad_out, Tensor<T>& grad_in) {
    const int64_t in_plane = static_cast<int64_t>(in_shape.height) * in_shape.width;
    const int64_t out_plane = static_cast<int64_t>(grad_out.shape().height) * grad_out.shape().width;
    const int64_t planes = static_cast<int64_t>(in_shape.batch) * in_shape.channels;
    for (int64_t p = 0; p < planes; ++p) {
        const T* go = grad_out.data() + p * out_plane;
        T* gi = grad_in.data() + p * in_plane;
        const int32_t* idx = indices.data() + p * in_plane;
        for (int64_t i = 0; i < in_plane; ++i) gi[i] += go[idx[i]];
    }
}

// ---- fully connected ----

template <typename T>
void fc_forward(const Tensor<T>& in, const Tensor<T>& weight, const Tensor<T>& bias,
                Tensor<T>& out) {
    const int b = in.shape().batch;
    const int d = static_cast<int>(in.shape().per_sample());
    const int units = weight.shape().batch;
    gemm(false, true, b, units, d, T(1), in.data(), d, weight.data(), d, T(0), out.data(), units);
    for (int i = 0; i < b; ++i)
        for (int u = 0; u < units; ++u) out[static_cast<int64_t>(i) * units + u] += bias[u];
}

template <typename T>
void fc_backward(const Tensor<T>& in, const Tensor<T>& weight, const Tensor<T>& grad_out,
                 Tensor<T>* grad_in, Tensor<T>* grad_weight, Tensor<T>* grad_bias) {
    const int b = in.shape().batch;
    const int d = static_cast<int>(in.shape().per_sample());
    const int units = weight.shape().batch;
    if (grad_weight)
        gemm(true, false, units, d, b, T(1), grad_out.data(), units, in.data(), d, T(1),
             grad_weight->data(), d);
    if (grad_bias)
        for (int i = 0; i < b; ++i)
            for (int u = 0; u < units; ++u)
                (*grad_bias)[u] += grad_out[static_cast<int64_t>(i) * units + u];
    if (grad_in)
        gemm(false, false, b, d, units, T(1), grad_out.data(), units, weight.data(), d, T(1),
             grad_in->data(), d);
}

// ---- batch normalization (per channel) ----

template <typename T>
void batch_norm_forward_train(const Tensor<T>& in, const Tensor<T>& scale, const Tensor<T>& shift,
                              Tensor<T>& out, std::vector<T>& mean, std::vector<T>& inv_std,
                              Tensor<T>& xhat, Tensor<T>* running_mean, Tensor<T>* running_var) {
    const auto& s = in.shape();
    const int64_t plane = static_cast<int64_t>(s.height) * s.width;
    const int64_t n = static_cast<int64_t>(s.batch) * plane;
    mean.assign(s.channels, T(0));
    inv_std.assign(s.channels, T(0));
    for (int c = 0; c < s.channels; ++c) {
        T m = T(0);
        for (int b = 0; b < s.batch; ++b) {
            const T* src = in.data() + (static_cast<int64_t>(b) * s.channels + c) * plane;
            for (int64_t i = 0; i < plane; ++i) m += src[i];
        }
        m /= static_cast<T>(n);
        T var = T(0);
        for (int b = 0; b < s.batch; ++b) {
            const T* src = in.data() + (static_cast<int64_t>(b) * s.channels + c) * plane;
            for (int64_t i = 0; i < plane; ++i) {
                const T d = src[i] - m;
                var += d * d;
            }
        }
        var /= static_cast<T>(n);
        mean[c] = m;
        inv_std[c] = T(1) / std::sqrt(var + static_cast<T>(detail::kBnEps));
        if (running_mean) {
            const T mom = static_cast<T>(detail::kBnMomentum);
            (*running_mean)[c] = (T(1) - mom) * (*running_mean)[c] + mom * m;
            (*running_var)[c] = (T(1) - mom) * (*running_var)[c] + mom * var;
        }
        const T g = scale[c], bb = shift[c], is = inv_std[c];
        for (int b = 0; b < s.batch; ++b) {
            const int64_t off = (static_cast<int64_t>(b) * s.channels + c) * plane;
            const T* src = in.data() + off;
            T* xh = xhat.data() + off;
            T* dst = out.data() + off;
            for (int64_t i = 0; i < plane; ++i) {
                xh[i] = (src[i] - m) * is;
                dst[i] = g * xh[i] + bb;
            }
        }
    }
}

template <typename T>
void batch_norm_forward_eval(const Tensor<T>& in, const Tensor<T>& scale, const Tensor<T>& shift,
                             const Tensor<T>& running_mean, const Tensor<T>& running_var,
                             Tensor<T>& out) {
    const auto& s = in.shape();
    const int64_t plane = static_cast<int64_t>(s.height) * s.width;
    for (int c = 0; c < s.channels; ++c) {
        const T is = T(1) / std::sqrt(running_var[c] + static_cast<T>(detail::kBnEps));
        const T g = scale[c], bb = shift[c], m = running_mean[c];
        for (int b = 0; b < s.batch; ++b) {
            const int64_t off = (static_cast<int64_t>(b) * s.channels + c) * plane;
            const T* src = in.data() + off;
            T* dst = out.data() + off;
            for (int64_t i = 0; i < plane; ++i) dst[i] = g * (src[i] - m) * is + bb;
        }
    }
}

template <typename T>
void batch_norm_backward(const Tensor<T>& grad_out, const Tensor<T>& xhat, const Tensor<T>& scale,
                         const std::vector<T>& inv_std, Tensor<T>* grad_in, Tensor<T>* grad_scale,
                         Tensor<T>* grad_shift) {
    const auto& s = grad_out.shape();
    const int64_t plane = static_cast<int64_t>(s.height) * s.width;
    const int64_t n = static_cast<int64_t>(s.batch) * plane;
    for (int c = 0; c < s.channels; ++c) {
        T sum_dy = T(0), sum_dy_xhat = T(0);
        for (int b = 0; b < s.batch; ++b) {
            const int64_t off = (static_cast<int64_t>(b) * s.channels + c) * plane;
            const T* dy = grad_out.data() + off;
            const T* xh = xhat.data() + off;
            for (int64_t i = 0; i < plane; ++i) {
                sum_dy += dy[i];
                sum_dy_xhat += dy[i] * xh[i];
            }
        }
        if (grad_scale) (*grad_scale)[c] += sum_dy_xhat;
        if (grad_shift) (*grad_shift)[c] += sum_dy;
        if (grad_in) {
            const T g_is_n = scale[c] * inv_std[c] / static_cast<T>(n);
            for (int b = 0; b < s.batch; ++b) {
                const int64_t off = (static_cast<int64_t>(b) * s.channels + c) * plane;
                const T* dy = grad_out.data() + off;
                const T* xh = xhat.data() + off;
                T* gi = grad_in->data() + off;
                for (int64_t i = 0; i < plane; ++i)
                    gi[i] += g_is_n * (static_cast<T>(n) * dy[i] - sum_dy - xh[i] * sum_dy_xhat);
            }
        }
    }
}

// ---- activations ----

template <typename T>
void activation_forward(const Tensor<T>& in, Activation kind, T slope, Tensor<T>& out) {
    const int64_t n = in.numel();
    switch (kind) {
        case Activation::relu:
            for (int64_t i = 0; i < n; ++i) out[i] = in[i] > T(0) ? in[i] : T(0);
            break;
        case Activation::leaky_relu:
            for (int64_t i = 0; i < n; ++i) out[i] = in[i] > T(0) ? in[i] : slope * in[i];
            break;
        case Activation::none:
            out = in;
            break;
    }
}

template <typename T>
void activation_backward(const Tensor<T>& in, Activation kind, T slope, const Tensor<T>& grad_out,
                         Tensor<T>& grad_in) {
    const int64_t n = in.numel();
    switch (kind) {
        case Activation::relu:
            for (int64_t i = 0; i < n; ++i) grad_in[i] += in[i] > T(0) ? grad_out[i] : T(0);
            break;
        case Activation::leaky_relu:
            for (int64_t i = 0; i < n; ++i)
                grad_in[i] += in[i] > T(0) ? grad_out[i] : slope * grad_out[i];
            break;
        case Activation::none:
            for (int64_t i = 0; i < n; ++i) grad_in[i] += grad_out[i];
            break;
    }
}

}  // namespace cycsteer

#endif
