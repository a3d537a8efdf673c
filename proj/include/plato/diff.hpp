#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "plato/errors.hpp"
#include "plato/rng.hpp"
#include "plato/tensor.hpp"

namespace plato {

enum class Activation { Identity, Relu, Tanh };

inline const char* to_string(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
    }
    return "identity";
}

inline Activation activation_from_string(const std::string& s) {
    if (s == "identity") return Activation::Identity;
    if (s == "relu") return Activation::Relu;
    if (s == "tanh") return Activation::Tanh;
    throw ConfigError("unknown activation: " + s);
}

template <class Real>
Real apply_activation(Activation a, Real z) {
    switch (a) {
        case Activation::Identity: return z;
        case Activation::Relu: return z > Real{0} ? z : Real{0};
        case Activation::Tanh: return std::tanh(z);
    }
    return z;
}

// Derivative in terms of pre-activation z. Relu subgradient at 0 is 0.
template <class Real>
Real activation_grad(Activation a, Real z) {
    switch (a) {
        case Activation::Identity: return Real{1};
        case Activation::Relu: return z > Real{0} ? Real{1} : Real{0};
        case Activation::Tanh: {
            const Real t = std::tanh(z);
            return Real{1} - t * t;
        }
    }
    return Real{1};
}

// out[b,:] += in[b,:] * W, with W stored (in_dim x out_dim) row-major.
template <class Real>
void affine_forward(const Tensor2<Real>& input, const Tensor2<Real>& w,
                    const std::vector<Real>& bias, Tensor2<Real>& out) {
    const int batch = input.rows;
    const int in_dim = w.rows;
    const int out_dim = w.cols;
    out.resize(batch, out_dim);
    for (int b = 0; b < batch; ++b) {
        Real* o = out.row(b);
        for (int k = 0; k < out_dim; ++k) {
            o[k] = bias[k];
        }
        const Real* x = input.row(b);
        for (int i = 0; i < in_dim; ++i) {
            const Real xi = x[i];
            if (xi == Real{0}) {
                continue;
            }
            const Real* wr = w.row(i);
            for (int k = 0; k < out_dim; ++k) {
                o[k] += xi * wr[k];
            }
        }
    }
}

// Stack of affine layers with the given activation between layers (the final
// layer stays affine). Caches a forward pass so backward can run against it;
// gradients accumulate until zero_grad().
template <class Real>
class DenseNet {
public:
    struct Layer {
        Tensor2<Real> w;   // in_dim x out_dim
        std::vector<Real> b;
        Tensor2<Real> dw;
        std::vector<Real> db;
        bool trainable = true;
    };

    DenseNet() = default;

    DenseNet(std::vector<int> layer_sizes, Activation activation, std::uint64_t init_seed)
        : sizes_(std::move(layer_sizes)), activation_(activation) {
        if (sizes_.size() < 2) {
            throw ConfigError("DenseNet needs at least two layer sizes");
        }
        Rng rng(init_seed);
        layers_.resize(sizes_.size() - 1);
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            const int in_dim = sizes_[l];
            const int out_dim = sizes_[l + 1];
            auto& layer = layers_[l];
            layer.w.resize(in_dim, out_dim);
            layer.b.assign(out_dim, Real{0});
            layer.dw.resize(in_dim, out_dim);
            layer.db.assign(out_dim, Real{0});
            // Glorot uniform.
            const double limit = std::sqrt(6.0 / (in_dim + out_dim));
            for (auto& v : layer.w.data) {
                v = static_cast<Real>(rng.uniform(-limit, limit));
            }
        }
    }

    const std::vector<int>& layer_sizes() const { return sizes_; }
    Activation activation() const { return activation_; }
    int input_dim() const { return sizes_.front(); }
    int output_dim() const { return sizes_.back(); }
    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }

    // Sum over layers of (in + 1) * out.
    std::size_t param_count() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            n += static_cast<std::size_t>(sizes_[l] + 1) * sizes_[l + 1];
        }
        return n;
    }

    const Tensor2<Real>& forward(const Tensor2<Real>& input) {
        if (input.cols != input_dim()) {
            throw ValidationError("DenseNet::forward: input has " + std::to_string(input.cols) +
                                  " columns, expected " + std::to_string(input_dim()));
        }
        const std::size_t n_layers = layers_.size();
        pre_.resize(n_layers);
        act_.resize(n_layers + 1);
        act_[0] = input;
        for (std::size_t l = 0; l < n_layers; ++l) {
            affine_forward(act_[l], layers_[l].w, layers_[l].b, pre_[l]);
            if (l + 1 < n_layers && activation_ != Activation::Identity) {
                act_[l + 1].resize(pre_[l].rows, pre_[l].cols);
                for (std::size_t i = 0; i < pre_[l].data.size(); ++i) {
                    act_[l + 1].data[i] = apply_activation(activation_, pre_[l].data[i]);
                }
            } else {
                act_[l + 1] = pre_[l];
            }
        }
        has_cache_ = true;
        return act_.back();
    }

    // Accumulates parameter gradients; returns gradient w.r.t. the input.
    Tensor2<Real> backward(const Tensor2<Real>& upstream) {
        if (!has_cache_) {
            throw RuntimeFailure("DenseNet::backward called without a cached forward pass");
        }
        if (upstream.rows != act_.back().rows || upstream.cols != act_.back().cols) {
            throw ValidationError("DenseNet::backward: upstream gradient shape mismatch");
        }
        Tensor2<Real> grad = upstream;
        const int n_layers = static_cast<int>(layers_.size());
        for (int l = n_layers - 1; l >= 0; --l) {
            // Through the activation that produced act_[l+1] (none on the last layer).
            if (l + 1 < n_layers && activation_ != Activation::Identity) {
                for (std::size_t i = 0; i < grad.data.size(); ++i) {
                    grad.data[i] *= activation_grad(activation_, pre_[l].data[i]);
                }
            }
            auto& layer = layers_[l];
            const auto& input = act_[l];
            const int batch = grad.rows;
            const int in_dim = layer.w.rows;
            const int out_dim = layer.w.cols;
            if (layer.trainable) {
                for (int b = 0; b < batch; ++b) {
                    const Real* g = grad.row(b);
                    const Real* x = input.row(b);
                    for (int k = 0; k < out_dim; ++k) {
                        layer.db[k] += g[k];
                    }
                    for (int i = 0; i < in_dim; ++i) {
                        const Real xi = x[i];
                        if (xi == Real{0}) {
                            continue;
                        }
                        Real* dwr = layer.dw.row(i);
                        for (int k = 0; k < out_dim; ++k) {
                            dwr[k] += xi * g[k];
                        }
                    }
                }
            }
            Tensor2<Real> down(batch, in_dim);
            for (int b = 0; b < batch; ++b) {
                const Real* g = grad.row(b);
                Real* dn = down.row(b);
                for (int i = 0; i < in_dim; ++i) {
                    const Real* wr = layer.w.row(i);
                    Real acc{0};
                    for (int k = 0; k < out_dim; ++k) {
                        acc += wr[k] * g[k];
                    }
                    dn[i] = acc;
                }
            }
            grad = std::move(down);
        }
        return grad;
    }

    void zero_grad() {
        for (auto& layer : layers_) {
            layer.dw.fill(Real{0});
            std::fill(layer.db.begin(), layer.db.end(), Real{0});
        }
    }

    template <class Fn>
    void for_each_block(Fn&& fn) {
        for (auto& layer : layers_) {
            if (!layer.trainable) {
                continue;
            }
            fn(std::span<Real>(layer.w.data), std::span<Real>(layer.dw.data));
            fn(std::span<Real>(layer.b), std::span<Real>(layer.db));
        }
    }

private:
    std::vector<int> sizes_;
    Activation activation_ = Activation::Identity;
    std::vector<Layer> layers_;
    std::vector<Tensor2<Real>> pre_;   // pre-activations per layer
    std::vector<Tensor2<Real>> act_;   // act_[0] = input copy
    bool has_cache_ = false;
};

// Numerically stable softmax (max subtraction), in place.
template <class Real>
void softmax_inplace(std::span<Real> v) {
    if (v.empty()) {
        throw ValidationError("softmax of empty list");
    }
    Real m = v[0];
    for (Real x : v) {
        m = std::max(m, x);
    }
    Real sum{0};
    for (Real& x : v) {
        x = std::exp(x - m);
        sum += x;
    }
    for (Real& x : v) {
        x /= sum;
    }
}

// d(loss)/d(logits) given softmax outputs alpha and d(loss)/d(alpha).
template <class Real>
void softmax_backward(std::span<const Real> alpha, std::span<const Real> dalpha,
                      std::span<Real> dlogits) {
    Real dot{0};
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        dot += alpha[i] * dalpha[i];
    }
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        dlogits[i] = alpha[i] * (dalpha[i] - dot);
    }
}

template <class Real>
Real mse_loss(std::span<const Real> pred, std::span<const Real> target) {
    Real acc{0};
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const Real diff = pred[i] - target[i];
        acc += diff * diff;
    }
    return acc / static_cast<Real>(pred.size());
}

// Scalar objective with analytic gradients, checkable by finite differences.
class DiffFunction {
public:
    virtual ~DiffFunction() = default;
    virtual std::size_t param_count() const = 0;
    virtual void get_params(std::span<double> out) const = 0;
    virtual void set_params(std::span<const double> in) = 0;
    virtual double value() = 0;
    // Returns the value and writes the full analytic gradient.
    virtual double value_and_gradient(std::span<double> grad) = 0;
};

// Max over parameters of |analytic - central difference| / max(1, |analytic|, |numeric|).
inline double grad_check(DiffFunction& fn, double epsilon) {
    const std::size_t n = fn.param_count();
    std::vector<double> params(n), analytic(n);
    fn.get_params(params);
    const double base = fn.value_and_gradient(analytic);
    if (!std::isfinite(base)) {
        throw RuntimeFailure("grad_check: objective is not finite");
    }
    double worst = 0.0;
    std::vector<double> perturbed = params;
    for (std::size_t i = 0; i < n; ++i) {
        perturbed[i] = params[i] + epsilon;
        fn.set_params(perturbed);
        const double up = fn.value();
        perturbed[i] = params[i] - epsilon;
        fn.set_params(perturbed);
        const double down = fn.value();
        perturbed[i] = params[i];
        if (!std::isfinite(up) || !std::isfinite(down)) {
            throw RuntimeFailure("grad_check: objective is not finite at perturbed point");
        }
        const double numeric = (up - down) / (2.0 * epsilon);
        const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(numeric)});
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    fn.set_params(params);
    return worst;
}

}  // namespace plato
