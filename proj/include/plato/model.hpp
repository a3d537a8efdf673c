#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "plato/diff.hpp"
#include "plato/embed.hpp"
#include "plato/kg.hpp"
#include "plato/rng.hpp"
#include "plato/tensor.hpp"

namespace plato {

enum class ModelKind {
    Plato,      // message passing + inferred first layer + MLP head
    PlatoNoMp,  // first layer inferred directly from the pretrained M
    PlatoLr,    // inferred first layer + single linear unit (no nonlinearity)
    Mlp,        // standard dense MLP, no KG
};

inline const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::Plato: return "plato";
        case ModelKind::PlatoNoMp: return "plato-no-mp";
        case ModelKind::PlatoLr: return "plato-lr";
        case ModelKind::Mlp: return "mlp";
    }
    return "plato";
}

struct MessagePassingConfig {
    int rounds = 2;
    double beta = 0.0;                         // in [0, 1]
    Activation sigma = Activation::Identity;   // optional nonlinearity in the update
    int attention_hidden = 16;
};

// Softmax-normalized attention weights for one neighborhood.
template <class Real>
std::vector<Real> attention_weights(std::vector<Real> logits) {
    softmax_inplace(std::span<Real>(logits));
    return logits;
}

// The PLATO computation: per-sample attention message passing over the
// feature graph, row-wise weight inference for the first layer, and an MLP
// head. Owns the trainable nets and their gradient accumulators; the
// embedding matrix M is frozen and never exposed to the optimizer.
template <class Real>
class PlatoNet {
public:
    struct Config {
        ModelKind kind = ModelKind::Plato;
        int d = 0;  // feature count
        int c = 0;  // embedding dimension (ignored for Mlp)
        int h = 0;  // first-layer width
        MessagePassingConfig mp;
        int b_layers = 2;      // affine layers in the inference net
        int b_hidden = 32;
        int total_layers = 2;  // L: first layer plus L-1 trainable layers
        int f_hidden = 32;     // hidden width of layers 3..L
        Activation activation = Activation::Relu;
    };

    // graph/row_of_feature describe the message-passing domain: for the
    // default feature-graph mode the nodes are the features themselves and
    // row_of_feature is the identity; for the imputed full-graph mode the
    // domain is the whole KG and non-feature nodes carry sample value 0.
    PlatoNet(const Config& cfg, const Tensor2<double>& m,
             std::shared_ptr<const FeatureGraphCsr> graph, std::vector<int> row_of_feature,
             std::uint64_t init_seed)
        : cfg_(cfg), graph_(std::move(graph)), row_of_feature_(std::move(row_of_feature)) {
        validate();
        if (cfg_.kind == ModelKind::Mlp) {
            mlp_ = std::make_unique<DenseNet<Real>>(mlp_sizes(), cfg_.activation,
                                                    derive_seed(init_seed, {1}));
            return;
        }
        m_ = cast_tensor<Real>(m);
        if (m_.rows != mp_node_count() || m_.cols != cfg_.c) {
            throw ValidationError("embedding matrix shape does not match the graph");
        }
        if (has_attention()) {
            attn_ = std::make_unique<DenseNet<Real>>(
                std::vector<int>{2, cfg_.mp.attention_hidden, 1}, Activation::Tanh,
                derive_seed(init_seed, {2}));
        }
        bnet_ = std::make_unique<DenseNet<Real>>(bnet_sizes(), cfg_.activation,
                                                 derive_seed(init_seed, {3}));
        upper_ = std::make_unique<DenseNet<Real>>(upper_sizes(), cfg_.activation,
                                                  derive_seed(init_seed, {4}));
        if (use_first_bias()) {
            first_bias_.assign(cfg_.h, Real{0});
            d_first_bias_.assign(cfg_.h, Real{0});
        }
        init_mp_buffers();
    }

    const Config& config() const { return cfg_; }
    const Tensor2<Real>& frozen_m() const { return m_; }

    bool has_attention() const {
        return cfg_.kind == ModelKind::Plato || cfg_.kind == ModelKind::PlatoLr;
    }
    bool use_first_bias() const {
        return cfg_.kind == ModelKind::Plato || cfg_.kind == ModelKind::PlatoNoMp;
    }
    int rounds() const { return has_attention() ? cfg_.mp.rounds : 0; }

    DenseNet<Real>& attention_net() { return *attn_; }
    DenseNet<Real>& inference_net() { return *bnet_; }
    DenseNet<Real>& upper_net() { return cfg_.kind == ModelKind::Mlp ? *mlp_ : *upper_; }
    std::vector<Real>& first_bias() { return first_bias_; }

    // e_jk for one pair of (standardized) sample values.
    Real attention_logit(Real x_j, Real x_k) {
        if (!std::isfinite(static_cast<double>(x_j)) || !std::isfinite(static_cast<double>(x_k))) {
            throw ValidationError("attention inputs must be finite");
        }
        Tensor2<Real> in(1, 2);
        in(0, 0) = x_j;
        in(0, 1) = x_k;
        return attn_->forward(in)(0, 0);
    }

    // Q for one sample: d x c rows in feature order.
    Tensor2<Real> message_pass(std::span<const Real> x) {
        check_sample(x);
        mp_forward(x);
        return gather_features(q_[rounds()]);
    }

    // Applies the shared inference net row-wise: row j of the result is the
    // inferred first-layer weight vector for feature j.
    Tensor2<Real> infer_first_layer(const Tensor2<Real>& q) {
        if (q.cols != cfg_.c) {
            throw ValidationError("infer_first_layer: embedding width mismatch");
        }
        return bnet_->forward(q);
    }

    Real predict(std::span<const Real> x) {
        check_sample(x);
        return forward(x);
    }

    // |Pi| + |Phi| + |Theta^[2..L]| + first-layer bias; excludes M and the
    // inferred first layer. For the plain MLP this is the full dense count.
    std::size_t count_trainable() const {
        if (cfg_.kind == ModelKind::Mlp) {
            return mlp_->param_count();
        }
        std::size_t n = bnet_->param_count() + upper_->param_count();
        if (attn_) {
            n += attn_->param_count();
        }
        n += first_bias_.size();
        return n;
    }

    // --- training surface -------------------------------------------------

    // Forward pass for one sample, caching everything backward needs.
    Real forward(std::span<const Real> x) {
        if (cfg_.kind == ModelKind::Mlp) {
            x_row_.resize(1, cfg_.d);
            std::copy(x.begin(), x.end(), x_row_.data.begin());
            return mlp_->forward(x_row_)(0, 0);
        }
        mp_forward(x);
        const Tensor2<Real>& q_final = q_[rounds()];
        if (mp_node_count() == cfg_.d) {
            theta_ = &bnet_->forward(q_final);
        } else {
            qf_ = gather_features(q_final);
            theta_ = &bnet_->forward(qf_);
        }
        // z1 = x . theta_hat (+ bias)
        z1_.assign(cfg_.h, Real{0});
        for (int j = 0; j < cfg_.d; ++j) {
            const Real xj = x[j];
            if (xj == Real{0}) {
                continue;
            }
            const Real* tr = theta_->row(j);
            for (int o = 0; o < cfg_.h; ++o) {
                z1_[o] += xj * tr[o];
            }
        }
        if (use_first_bias()) {
            for (int o = 0; o < cfg_.h; ++o) {
                z1_[o] += first_bias_[o];
            }
        }
        a1_.resize(1, cfg_.h);
        const Activation act = first_activation();
        for (int o = 0; o < cfg_.h; ++o) {
            a1_(0, o) = apply_activation(act, z1_[o]);
        }
        return upper_->forward(a1_)(0, 0);
    }

    // Backward for the sample last passed to forward(); dy is dLoss/dyhat.
    // Accumulates gradients for every trainable block.
    void backward(Real dy, std::span<const Real> x) {
        if (cfg_.kind == ModelKind::Mlp) {
            Tensor2<Real> up(1, 1);
            up(0, 0) = dy;
            mlp_->backward(up);
            return;
        }
        Tensor2<Real> up(1, 1);
        up(0, 0) = dy;
        Tensor2<Real> da1 = upper_->backward(up);
        const Activation act = first_activation();
        dz1_.assign(cfg_.h, Real{0});
        for (int o = 0; o < cfg_.h; ++o) {
            dz1_[o] = da1(0, o) * activation_grad(act, z1_[o]);
        }
        if (use_first_bias()) {
            for (int o = 0; o < cfg_.h; ++o) {
                d_first_bias_[o] += dz1_[o];
            }
        }
        dtheta_.resize(cfg_.d, cfg_.h);
        for (int j = 0; j < cfg_.d; ++j) {
            const Real xj = x[j];
            Real* row = dtheta_.row(j);
            if (xj == Real{0}) {
                std::fill(row, row + cfg_.h, Real{0});
                continue;
            }
            for (int o = 0; o < cfg_.h; ++o) {
                row[o] = xj * dz1_[o];
            }
        }
        Tensor2<Real> dqf = bnet_->backward(dtheta_);
        if (rounds() == 0) {
            return;  // M is frozen; nothing upstream of B
        }
        scatter_features(dqf, dq_a_);
        mp_backward();
    }

    void zero_grad() {
        if (mlp_) {
            mlp_->zero_grad();
        }
        if (attn_) {
            attn_->zero_grad();
        }
        if (bnet_) {
            bnet_->zero_grad();
        }
        if (upper_) {
            upper_->zero_grad();
        }
        std::fill(d_first_bias_.begin(), d_first_bias_.end(), Real{0});
    }

    // Visits every trainable (params, grads) block in a fixed order.
    template <class Fn>
    void for_each_block(Fn&& fn) {
        if (mlp_) {
            mlp_->for_each_block(fn);
        }
        if (attn_) {
            attn_->for_each_block(fn);
        }
        if (bnet_) {
            bnet_->for_each_block(fn);
        }
        if (upper_) {
            upper_->for_each_block(fn);
        }
        if (!first_bias_.empty()) {
            fn(std::span<Real>(first_bias_), std::span<Real>(d_first_bias_));
        }
    }

    std::vector<Real> params_flat() {
        std::vector<Real> out;
        out.reserve(count_trainable());
        for_each_block([&](std::span<Real> p, std::span<Real>) {
            out.insert(out.end(), p.begin(), p.end());
        });
        return out;
    }

    void set_params_flat(std::span<const Real> flat) {
        std::size_t cursor = 0;
        for_each_block([&](std::span<Real> p, std::span<Real>) {
            std::copy(flat.begin() + cursor, flat.begin() + cursor + p.size(), p.begin());
            cursor += p.size();
        });
        if (cursor != flat.size()) {
            throw ValidationError("set_params_flat: size mismatch");
        }
    }

    std::vector<Real> grads_flat() {
        std::vector<Real> out;
        out.reserve(count_trainable());
        for_each_block([&](std::span<Real>, std::span<Real> g) {
            out.insert(out.end(), g.begin(), g.end());
        });
        return out;
    }

private:
    void validate() const {
        if (cfg_.d <= 0 || cfg_.h <= 0) {
            throw ConfigError("d and h must be positive");
        }
        if (cfg_.kind != ModelKind::Mlp) {
            if (cfg_.c <= 0) {
                throw ConfigError("embedding dimension must be positive");
            }
            if (cfg_.mp.beta < 0.0 || cfg_.mp.beta > 1.0) {
                throw ConfigError("beta must be in [0, 1]");
            }
            if (cfg_.mp.rounds < 0) {
                throw ConfigError("rounds must be >= 0");
            }
            if (cfg_.b_layers < 1) {
                throw ConfigError("inference net needs at least one layer");
            }
            if (!graph_) {
                throw ConfigError("message passing requires a feature graph");
            }
            if (static_cast<int>(row_of_feature_.size()) != cfg_.d) {
                throw ValidationError("row_of_feature must map every feature");
            }
        }
        if (cfg_.kind == ModelKind::Plato || cfg_.kind == ModelKind::PlatoNoMp ||
            cfg_.kind == ModelKind::Mlp) {
            if (cfg_.total_layers < 2) {
                throw ConfigError("total_layers must be >= 2");
            }
        }
    }

    Activation first_activation() const {
        return cfg_.kind == ModelKind::PlatoLr ? Activation::Identity : cfg_.activation;
    }

    int mp_node_count() const { return graph_ ? graph_->node_count : cfg_.d; }

    std::vector<int> bnet_sizes() const {
        std::vector<int> sizes{cfg_.c};
        for (int l = 0; l < cfg_.b_layers - 1; ++l) {
            sizes.push_back(cfg_.b_hidden);
        }
        sizes.push_back(cfg_.h);
        return sizes;
    }

    std::vector<int> upper_sizes() const {
        // Layers 2..L of the MLP; a single linear unit for the regression head.
        if (cfg_.kind == ModelKind::PlatoLr) {
            return {cfg_.h, 1};
        }
        std::vector<int> sizes{cfg_.h};
        for (int l = 0; l < cfg_.total_layers - 2; ++l) {
            sizes.push_back(cfg_.f_hidden);
        }
        sizes.push_back(1);
        return sizes;
    }

    std::vector<int> mlp_sizes() const {
        std::vector<int> sizes{cfg_.d, cfg_.h};
        for (int l = 0; l < cfg_.total_layers - 2; ++l) {
            sizes.push_back(cfg_.f_hidden);
        }
        sizes.push_back(1);
        return sizes;
    }

    void init_mp_buffers() {
        const int v = mp_node_count();
        q_.resize(rounds() + 1);
        q_[0] = m_;  // round 0 is the frozen M; never rewritten
        for (int r = 1; r <= rounds(); ++r) {
            q_[r].resize(v, cfg_.c);
        }
        if (cfg_.mp.sigma != Activation::Identity) {
            pre_.resize(rounds());
            for (auto& t : pre_) {
                t.resize(v, cfg_.c);
            }
        }
        values_.assign(v, Real{0});
        const int nnz = graph_ ? static_cast<int>(graph_->neighbors.size()) : 0;
        attn_in_.resize(nnz, 2);
        alpha_.assign(nnz, Real{0});
        dalpha_.assign(nnz, Real{0});
        dq_a_.resize(v, cfg_.c);
        dq_b_.resize(v, cfg_.c);
    }

    void check_sample(std::span<const Real> x) const {
        if (static_cast<int>(x.size()) != cfg_.d) {
            throw ValidationError("sample has wrong dimension");
        }
        for (Real v : x) {
            if (!std::isfinite(static_cast<double>(v))) {
                throw ValidationError("sample contains a non-finite value");
            }
        }
    }

    void mp_forward(std::span<const Real> x) {
        const int v = mp_node_count();
        // Scatter sample values onto graph nodes (0 for non-feature nodes).
        std::fill(values_.begin(), values_.end(), Real{0});
        for (int j = 0; j < cfg_.d; ++j) {
            values_[row_of_feature_[j]] = x[j];
        }
        const int r_total = rounds();
        if (r_total == 0) {
            return;
        }
        const auto& csr = *graph_;
        const int nnz = static_cast<int>(csr.neighbors.size());
        if (nnz > 0) {
            // Attention logits do not depend on the round: compute once.
            for (int j = 0; j < v; ++j) {
                for (int idx = csr.offsets[j]; idx < csr.offsets[j + 1]; ++idx) {
                    attn_in_(idx, 0) = values_[j];
                    attn_in_(idx, 1) = values_[csr.neighbors[idx]];
                }
            }
            const Tensor2<Real>& logits = attn_->forward(attn_in_);
            for (int idx = 0; idx < nnz; ++idx) {
                alpha_[idx] = logits(idx, 0);
            }
            for (int j = 0; j < v; ++j) {
                const int begin = csr.offsets[j], end = csr.offsets[j + 1];
                if (begin < end) {
                    softmax_inplace(std::span<Real>(alpha_.data() + begin,
                                                    static_cast<std::size_t>(end - begin)));
                }
            }
        }
        const Real beta = static_cast<Real>(cfg_.mp.beta);
        const Real self_w = Real{1} - beta;
        const int c = cfg_.c;
        for (int r = 1; r <= r_total; ++r) {
            const Tensor2<Real>& prev = q_[r - 1];
            Tensor2<Real>& cur = q_[r];
            for (int j = 0; j < v; ++j) {
                const Real* pj = prev.row(j);
                Real* out = cur.row(j);
                for (int k = 0; k < c; ++k) {
                    out[k] = self_w * pj[k];
                }
                for (int idx = csr.offsets[j]; idx < csr.offsets[j + 1]; ++idx) {
                    const Real w = beta * alpha_[idx];
                    const Real* pk = prev.row(csr.neighbors[idx]);
                    for (int k = 0; k < c; ++k) {
                        out[k] += w * pk[k];
                    }
                }
                if (cfg_.mp.sigma != Activation::Identity) {
                    Real* stash = pre_[r - 1].row(j);
                    for (int k = 0; k < c; ++k) {
                        stash[k] = out[k];
                        out[k] = apply_activation(cfg_.mp.sigma, out[k]);
                    }
                }
            }
        }
    }

    // Consumes dq_a_ = dLoss/dQ^[R]; accumulates attention-net gradients.
    void mp_backward() {
        const auto& csr = *graph_;
        const int v = mp_node_count();
        const int c = cfg_.c;
        const Real beta = static_cast<Real>(cfg_.mp.beta);
        const Real self_w = Real{1} - beta;
        std::fill(dalpha_.begin(), dalpha_.end(), Real{0});

        Tensor2<Real>* dq = &dq_a_;
        Tensor2<Real>* down = &dq_b_;
        for (int r = rounds(); r >= 1; --r) {
            if (cfg_.mp.sigma != Activation::Identity) {
                const auto& pre = pre_[r - 1];
                for (std::size_t i = 0; i < dq->data.size(); ++i) {
                    dq->data[i] *= activation_grad(cfg_.mp.sigma, pre.data[i]);
                }
            }
            down->fill(Real{0});
            const Tensor2<Real>& prev = q_[r - 1];
            for (int j = 0; j < v; ++j) {
                const Real* gz = dq->row(j);
                Real* dj = down->row(j);
                for (int k = 0; k < c; ++k) {
                    dj[k] += self_w * gz[k];
                }
                for (int idx = csr.offsets[j]; idx < csr.offsets[j + 1]; ++idx) {
                    const int nbr = csr.neighbors[idx];
                    Real* dn = down->row(nbr);
                    const Real* pk = prev.row(nbr);
                    const Real w = beta * alpha_[idx];
                    Real dot{0};
                    for (int k = 0; k < c; ++k) {
                        dn[k] += w * gz[k];
                        dot += gz[k] * pk[k];
                    }
                    dalpha_[idx] += beta * dot;
                }
            }
            std::swap(dq, down);
        }

        const int nnz = static_cast<int>(csr.neighbors.size());
        if (nnz == 0) {
            return;
        }
        Tensor2<Real> dlogits(nnz, 1);
        for (int j = 0; j < v; ++j) {
            const int begin = csr.offsets[j], end = csr.offsets[j + 1];
            if (begin >= end) {
                continue;
            }
            const auto len = static_cast<std::size_t>(end - begin);
            softmax_backward(std::span<const Real>(alpha_.data() + begin, len),
                             std::span<const Real>(dalpha_.data() + begin, len),
                             std::span<Real>(dlogits.data.data() + begin, len));
        }
        attn_->backward(dlogits);  // input grads discarded: sample values are constants
    }

    Tensor2<Real> gather_features(const Tensor2<Real>& q_nodes) const {
        if (mp_node_count() == cfg_.d) {
            return q_nodes;
        }
        Tensor2<Real> out(cfg_.d, cfg_.c);
        for (int j = 0; j < cfg_.d; ++j) {
            const Real* src = q_nodes.row(row_of_feature_[j]);
            std::copy(src, src + cfg_.c, out.row(j));
        }
        return out;
    }

    void scatter_features(const Tensor2<Real>& dqf, Tensor2<Real>& dq_nodes) const {
        if (mp_node_count() == cfg_.d) {
            dq_nodes = dqf;
            return;
        }
        dq_nodes.fill(Real{0});
        for (int j = 0; j < cfg_.d; ++j) {
            const Real* src = dqf.row(j);
            std::copy(src, src + cfg_.c, dq_nodes.row(row_of_feature_[j]));
        }
    }

    Config cfg_;
    std::shared_ptr<const FeatureGraphCsr> graph_;
    std::vector<int> row_of_feature_;
    Tensor2<Real> m_;

    std::unique_ptr<DenseNet<Real>> attn_;
    std::unique_ptr<DenseNet<Real>> bnet_;
    std::unique_ptr<DenseNet<Real>> upper_;
    std::unique_ptr<DenseNet<Real>> mlp_;
    std::vector<Real> first_bias_;
    std::vector<Real> d_first_bias_;

    // per-sample work buffers
    std::vector<Real> values_;
    Tensor2<Real> attn_in_;
    std::vector<Real> alpha_;
    std::vector<Real> dalpha_;
    std::vector<Tensor2<Real>> q_;
    std::vector<Tensor2<Real>> pre_;
    Tensor2<Real> dq_a_, dq_b_;
    Tensor2<Real> qf_;
    const Tensor2<Real>* theta_ = nullptr;
    std::vector<Real> z1_, dz1_;
    Tensor2<Real> a1_;
    Tensor2<Real> dtheta_;
    Tensor2<Real> x_row_;
};

}  // namespace plato
