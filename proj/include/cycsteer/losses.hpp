#ifndef CYCSTEER_LOSSES_HPP
#define CYCSTEER_LOSSES_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cycsteer/domain.hpp"
#include "cycsteer/tensor.hpp"

namespace cycsteer {

enum class GeneratorObjectiveKind : uint8_t {
    saturating,  // minimize mean log(1 - p_mimicked(fake))
    flipped,     // minimize mean -log p_mimicked(fake)
};

inline std::string to_string(GeneratorObjectiveKind k) {
    return k == GeneratorObjectiveKind::saturating ? "saturating" : "flipped";
}
inline GeneratorObjectiveKind generator_objective_from_string(const std::string& s) {
    if (s == "saturating") return GeneratorObjectiveKind::saturating;
    if (s == "flipped") return GeneratorObjectiveKind::flipped;
    throw std::invalid_argument("unknown generator objective: " + s);
}

// Named scalar losses of one training step. l_combined is the weighted sum
// of the generator-side GAN terms, the reconstruction term and the semantic
// regression term.
struct LossReport {
    double l_steering = 0;
    double l_disc_s2t = 0;
    double l_gen_s2t = 0;
    double l_disc_t2s = 0;
    double l_gen_t2s = 0;
    double l_rec = 0;
    double l_regression = 0;
    double l_combined = 0;
};

struct CombinedWeights {
    double gan_s2t = 1.0;
    double gan_t2s = 1.0;
    double rec = 1.0;
    double regression = 1.0;
};

namespace detail {
constexpr double kProbClamp = 1e-7;
}

// ---- steering regression (mean squared error) ----

template <typename T>
T steering_mse(const std::vector<T>& predictions, const std::vector<T>& labels) {
    if (predictions.empty()) throw std::invalid_argument("steering_mse: empty batch");
    if (predictions.size() != labels.size())
        throw std::invalid_argument("steering_mse: prediction/label count mismatch");
    T acc = T(0);
    for (size_t i = 0; i < predictions.size(); ++i) {
        const T d = predictions[i] - labels[i];
        acc += d * d;
    }
    return acc / static_cast<T>(predictions.size());
}

// d/dp of steering_mse; grad has one entry per prediction.
template <typename T>
T steering_mse_with_grad(const std::vector<T>& predictions, const std::vector<T>& labels,
                         std::vector<T>& grad) {
    const T value = steering_mse(predictions, labels);
    grad.resize(predictions.size());
    const T scale = T(2) / static_cast<T>(predictions.size());
    for (size_t i = 0; i < predictions.size(); ++i)
        grad[i] = scale * (predictions[i] - labels[i]);
    return value;
}

// ---- softmax cross-entropy over (B, 2) logits ----

template <typename T>
void softmax2(const T* logits, T* probs) {
    const T m = std::max(logits[0], logits[1]);
    const T e0 = std::exp(logits[0] - m), e1 = std::exp(logits[1] - m);
    const T z = e0 + e1;
    probs[0] = e0 / z;
    probs[1] = e1 / z;
}

// Mean cross-entropy of per-sample true classes; `grad` (optional) receives
// dL/dlogits scaled by `grad_weight`.
template <typename T>
T softmax_cross_entropy(const Tensor<T>& logits, const std::vector<int>& classes,
                        Tensor<T>* grad = nullptr, T grad_weight = T(1)) {
    const int b = logits.shape().batch;
    if (logits.shape().per_sample() != 2)
        throw std::invalid_argument("softmax_cross_entropy: logits must be (B,2), got " +
                                    logits.shape().str());
    if (static_cast<int>(classes.size()) != b)
        throw std::invalid_argument("softmax_cross_entropy: class count mismatch");
    if (!logits.all_finite())
        throw std::invalid_argument("softmax_cross_entropy: non-finite logits");
    T acc = T(0);
    const T scale = grad_weight / static_cast<T>(b);
    for (int i = 0; i < b; ++i) {
        T p[2];
        softmax2(logits.data() + 2 * i, p);
        const int t = classes[i];
        const T pt = std::max(p[t], static_cast<T>(detail::kProbClamp));
        acc += -std::log(pt);
        if (grad) {
            (*grad)[2 * i + t] += scale * (p[t] - T(1));
            (*grad)[2 * i + (1 - t)] += scale * p[1 - t];
        }
    }
    return acc / static_cast<T>(b);
}

// Discriminator objective: mean softmax cross-entropy over the real batch
// (true class = the real samples' domain) and the fake batch (true class =
// the domain the generator synthesized FROM). Per-sample mean, so uniform
// probabilities give ln 2.
template <typename T>
T discriminator_loss(const Tensor<T>& logits_real, const Tensor<T>& logits_fake,
                     Domain domain_of_real, Tensor<T>* grad_real = nullptr,
                     Tensor<T>* grad_fake = nullptr) {
    const int br = logits_real.shape().batch;
    const int bf = logits_fake.shape().batch;
    const T wr = static_cast<T>(br) / static_cast<T>(br + bf);
    const T wf = static_cast<T>(bf) / static_cast<T>(br + bf);
    const std::vector<int> real_cls(br, class_index(domain_of_real));
    const std::vector<int> fake_cls(bf, class_index(other(domain_of_real)));
    const T lr = softmax_cross_entropy(logits_real, real_cls, grad_real, wr);
    const T lf = softmax_cross_entropy(logits_fake, fake_cls, grad_fake, wf);
    return wr * lr + wf * lf;
}

// Generator objective over discriminator logits for a fake batch.
// `mimicked` is the domain the generator is translating into. Probabilities
// are clamped to [1e-7, 1-1e-7] before the log; the gradient vanishes in the
// clamped region.
template <typename T>
T generator_loss(const Tensor<T>& logits_fake, GeneratorObjectiveKind kind,
                 Domain mimicked = Domain::target, Tensor<T>* grad = nullptr,
                 T grad_weight = T(1)) {
    const int b = logits_fake.shape().batch;
    if (logits_fake.shape().per_sample() != 2)
        throw std::invalid_argument("generator_loss: logits must be (B,2), got " +
                                    logits_fake.shape().str());
    if (!logits_fake.all_finite())
        throw std::invalid_argument("generator_loss: non-finite logits");
    const int t = class_index(mimicked);
    const T lo = static_cast<T>(detail::kProbClamp);
    const T hi = T(1) - lo;
    T acc = T(0);
    const T scale = grad_weight / static_cast<T>(b);
    for (int i = 0; i < b; ++i) {
        T p[2];
        softmax2(logits_fake.data() + 2 * i, p);
        const T pt = std::min(std::max(p[t], lo), hi);
        const bool clamped = p[t] < lo || p[t] > hi;
        if (kind == GeneratorObjectiveKind::flipped) {
            acc += -std::log(pt);
            if (grad && !clamped) {
                (*grad)[2 * i + t] += scale * (p[t] - T(1));
                (*grad)[2 * i + (1 - t)] += scale * p[1 - t];
            }
        } else {
            acc += std::log(T(1) - pt);
            if (grad && !clamped) {
                // d/dz_j log(1-p_t) = -p_t (delta_tj - p_j) / (1-p_t)
                const T f = -p[t] / (T(1) - pt);
                (*grad)[2 * i + t] += scale * f * (T(1) - p[t]);
                (*grad)[2 * i + (1 - t)] += scale * f * (-p[1 - t]);
            }
        }
    }
    return acc / static_cast<T>(b);
}

// Cycle-reconstruction objective: mean absolute error of both round trips,
// G_ts(G_st(x_s)) vs x_s and G_st(G_ts(x_t)) vs x_t. Mean is over batch and
// elements, so the value is resolution-independent; the two direction terms
// add. Optional grads are w.r.t. the cycled tensors.
template <typename T>
T reconstruction_loss(const Tensor<T>& x_s, const Tensor<T>& x_s_cycled, const Tensor<T>& x_t,
                      const Tensor<T>& x_t_cycled, Tensor<T>* grad_s_cycled = nullptr,
                      Tensor<T>* grad_t_cycled = nullptr, T grad_weight = T(1)) {
    auto one_direction = [&](const Tensor<T>& orig, const Tensor<T>& cycled,
                             Tensor<T>* grad) -> T {
        if (orig.shape() != cycled.shape())
            throw std::invalid_argument("reconstruction_loss: shape mismatch " +
                                        orig.shape().str() + " vs " + cycled.shape().str());
        const int64_t n = orig.numel();
        if (n == 0) return T(0);
        T acc = T(0);
        const T scale = grad_weight / static_cast<T>(n);
        for (int64_t i = 0; i < n; ++i) {
            const T d = cycled[i] - orig[i];
            acc += std::abs(d);
            if (grad) (*grad)[i] += d > T(0) ? scale : (d < T(0) ? -scale : T(0));
        }
        return acc / static_cast<T>(n);
    };
    return one_direction(x_s, x_s_cycled, grad_s_cycled) +
           one_direction(x_t, x_t_cycled, grad_t_cycled);
}

// Semantic retention term: the regressor must predict the source labels both
// from source images and from their translations into the target domain.
template <typename T>
T semantic_regression_loss(const std::vector<T>& pred_on_source,
                           const std::vector<T>& pred_on_synth, const std::vector<T>& labels) {
    if (pred_on_source.size() != labels.size() || pred_on_synth.size() != labels.size())
        throw std::invalid_argument("semantic_regression_loss: batch size mismatch");
    return steering_mse(pred_on_source, labels) + steering_mse(pred_on_synth, labels);
}

inline double combined_loss(const LossReport& parts, const CombinedWeights& w) {
    if (w.gan_s2t < 0 || w.gan_t2s < 0 || w.rec < 0 || w.regression < 0)
        throw std::invalid_argument("combined_loss: negative weight");
    return w.gan_s2t * parts.l_gen_s2t + w.gan_t2s * parts.l_gen_t2s + w.rec * parts.l_rec +
           w.regression * parts.l_regression;
}

}  // namespace cycsteer

#endif
