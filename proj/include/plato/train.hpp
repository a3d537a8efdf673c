#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plato/data.hpp"
#include "plato/diff.hpp"
#include "plato/embed.hpp"
#include "plato/model.hpp"
#include "plato/optim.hpp"

namespace plato {

enum class Precision { Float64, Float32 };

inline const char* to_string(Precision p) {
    return p == Precision::Float64 ? "f64" : "f32";
}

inline Precision precision_from_string(const std::string& s) {
    if (s == "f64") return Precision::Float64;
    if (s == "f32") return Precision::Float32;
    throw ConfigError("unknown precision: " + s);
}

// One sampled hyperparameter configuration.
struct TrialConfig {
    double learning_rate = 1e-3;
    int batch_size = 32;
    double l2 = 0.0;
    int rounds = 2;
    double beta = 0.01;
    int attention_hidden = 16;
    int b_layers = 2;
    int b_hidden = 32;
    int total_layers = 2;  // L
    int hidden = 32;       // h and the hidden width of layers 3..L-1
    Activation sigma = Activation::Identity;
    Activation activation = Activation::Relu;
    int max_epochs = 200;
    int patience = 20;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
    static TrialConfig from_json(const nlohmann::json& j);
};

// Sampling ranges for random search. paper() mirrors the published table;
// desk() is scaled down for the d=2000 synthetic benchmark.
struct SearchRanges {
    double lr_lo = 1e-4, lr_hi = 5e-3;
    std::vector<int> batch_sizes{16, 32, 64};
    double l2_zero_prob = 0.5;
    double l2_lo = 1e-5, l2_hi = 1e-2;
    int rounds = 2;
    double beta_lo = 1e-4, beta_hi = 1e-1;
    int attention_hidden_lo = 16, attention_hidden_hi = 512;
    int b_layers_lo = 2, b_layers_hi = 6;
    int b_hidden_lo = 16, b_hidden_hi = 512;
    int total_layers_lo = 2, total_layers_hi = 6;
    int hidden_lo = 16, hidden_hi = 512;
    int max_epochs = 200, patience = 20;

    // linear baselines
    double ridge_l2_lo = 1e-4, ridge_l2_hi = 10.0;
    double lasso_l1_lo = 1e-4, lasso_l1_hi = 10.0;
    double graph_lambda_zero_prob = 0.5;
    double graph_lambda_lo = 1e-5, graph_lambda_hi = 1e2;
    double graph_l1_zero_prob = 0.5;
    double graph_l1_lo = 1e-5, graph_l1_hi = 1e2;

    static SearchRanges paper();
    static SearchRanges desk();
};

// Independent draws per field: LogUniform via exp of a uniform on log bounds,
// UniformInt inclusive, categorical uniform.
TrialConfig sample_config(Rng& rng, const SearchRanges& ranges);

// Everything the model needs beyond the tabular data. For Mlp, embeddings and
// graph stay empty.
struct ModelInputs {
    ModelKind kind = ModelKind::Plato;
    std::shared_ptr<const FeatureEmbeddings> m;
    std::shared_ptr<const FeatureGraphCsr> graph;
    std::vector<int> row_of_feature;  // identity for the feature-graph mode
    std::shared_ptr<const KnowledgeGraph> feature_kg;  // graph-regularized baselines

    static ModelInputs mlp();
    static ModelInputs plato(ModelKind kind, std::shared_ptr<const FeatureEmbeddings> m,
                             const KnowledgeGraph& feature_kg);
    // Message passing over the full KG with value 0 imputed on non-feature nodes.
    static ModelInputs plato_full_graph(ModelKind kind, const NodeEmbeddingTable& table,
                                        const KnowledgeGraph& kg, const FeatureMapping& fm);
};

struct EpochStats {
    double train_mse = 0.0;  // standardized scale
    double val_r = 0.0;
};

struct TrialResult {
    double val_r = 0.0;
    double test_r = 0.0;
    std::vector<EpochStats> history;
    int epochs_run = 0;
    int best_epoch = -1;
    bool failed = false;
    std::string error;
};

template <class Real>
struct PreparedSplit {
    SplitSpec split;
    Tensor2<Real> x_std;
    std::vector<Real> y_std;
    std::vector<double> y_orig;
};

template <class Real>
std::shared_ptr<const PreparedSplit<Real>> prepare_split(const TabularDataset& data,
                                                         std::uint64_t split_seed) {
    auto out = std::make_shared<PreparedSplit<Real>>();
    out->split = split_dataset(data.n(), split_seed);
    const auto stats = Standardizer::fit(data, out->split.train);
    out->x_std = cast_tensor<Real>(stats.transform_x(data.x));
    const auto ys = stats.transform_y(data.y);
    out->y_std.assign(ys.begin(), ys.end());
    out->y_orig = data.y;
    return out;
}

// Minibatch Adam on MSE + l2 * ||trainable weights||^2 with early stopping on
// validation PearsonR. Single-threaded and deterministic per seed.
template <class Real>
class TrainEngine {
public:
    TrainEngine(std::shared_ptr<const PreparedSplit<Real>> data, const ModelInputs& inputs,
                const TrialConfig& trial)
        : data_(std::move(data)), trial_(trial) {
        typename PlatoNet<Real>::Config cfg;
        cfg.kind = inputs.kind;
        cfg.d = data_->x_std.cols;
        cfg.h = trial.hidden;
        cfg.mp = MessagePassingConfig{trial.rounds, trial.beta, trial.sigma,
                                      trial.attention_hidden};
        cfg.b_layers = trial.b_layers;
        cfg.b_hidden = trial.b_hidden;
        cfg.total_layers = trial.total_layers;
        cfg.f_hidden = trial.hidden;
        cfg.activation = trial.activation;
        if (inputs.kind == ModelKind::Mlp) {
            cfg.c = 0;
            net_ = std::make_unique<PlatoNet<Real>>(cfg, Tensor2<double>{}, nullptr,
                                                    std::vector<int>{},
                                                    derive_seed(trial.seed, {0x6e6574u}));
        } else {
            if (!inputs.m || !inputs.graph) {
                throw ConfigError("PLATO model requires embeddings and a feature graph");
            }
            cfg.c = inputs.m->c;
            net_ = std::make_unique<PlatoNet<Real>>(cfg, inputs.m->values, inputs.graph,
                                                    inputs.row_of_feature,
                                                    derive_seed(trial.seed, {0x6e6574u}));
        }
    }

    PlatoNet<Real>& net() { return *net_; }
    const TrialConfig& trial() const { return trial_; }

    // Mean MSE over the given samples plus the l2 penalty; gradients
    // accumulate into the net when with_grad is set.
    double batch_objective(const std::vector<int>& indices, bool with_grad) {
        net_->zero_grad();
        const auto batch = static_cast<double>(indices.size());
        double mse = 0.0;
        for (int i : indices) {
            const auto x = data_->x_std.row_span(i);
            const Real yhat = net_->forward(x);
            const double diff = static_cast<double>(yhat) - static_cast<double>(data_->y_std[i]);
            mse += diff * diff;
            if (with_grad) {
                net_->backward(static_cast<Real>(2.0 * diff / batch), x);
            }
        }
        mse /= batch;
        double penalty = 0.0;
        if (trial_.l2 > 0.0) {
            const Real two_l2 = static_cast<Real>(2.0 * trial_.l2);
            net_->for_each_block([&](std::span<Real> p, std::span<Real> g) {
                for (std::size_t k = 0; k < p.size(); ++k) {
                    penalty += static_cast<double>(p[k]) * static_cast<double>(p[k]);
                    if (with_grad) {
                        g[k] += two_l2 * p[k];
                    }
                }
            });
            penalty *= trial_.l2;
        }
        last_mse_ = mse;
        return mse + penalty;
    }

    std::vector<double> predict(const std::vector<int>& indices) {
        std::vector<double> out;
        out.reserve(indices.size());
        for (int i : indices) {
            out.push_back(static_cast<double>(net_->forward(data_->x_std.row_span(i))));
        }
        return out;
    }

    double validation_r(const std::vector<int>& indices) {
        std::vector<double> truth;
        truth.reserve(indices.size());
        for (int i : indices) {
            truth.push_back(data_->y_orig[i]);
        }
        return pearson_r(truth, predict(indices));
    }

    TrialResult run() {
        TrialResult result;
        const auto& split = data_->split;
        Adam<Real> adam(flat_param_count(), trial_.learning_rate);
        Rng rng(derive_seed(trial_.seed, {0x65706f63u /* "epoc" */}));
        std::vector<int> order = split.train;
        std::vector<Real> best_params;
        double best_val = -2.0;
        int patience_left = trial_.patience;

        for (int epoch = 0; epoch < trial_.max_epochs; ++epoch) {
            rng.shuffle(order);
            double epoch_mse = 0.0;
            int batches = 0;
            for (std::size_t start = 0; start < order.size();
                 start += static_cast<std::size_t>(trial_.batch_size)) {
                const auto end = std::min(order.size(),
                                          start + static_cast<std::size_t>(trial_.batch_size));
                batch_.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                              order.begin() + static_cast<std::ptrdiff_t>(end));
                const double objective = batch_objective(batch_, /*with_grad=*/true);
                if (!std::isfinite(objective)) {
                    result.failed = true;
                    result.error = "training diverged at epoch " + std::to_string(epoch) +
                                   " batch " + std::to_string(batches);
                    return result;
                }
                epoch_mse += last_mse_;
                ++batches;
                if (trial_.learning_rate > 0.0) {
                    adam.begin_step();
                    net_->for_each_block([&](std::span<Real> p, std::span<Real> g) {
                        adam.update_block(p, g);
                    });
                }
            }
            EpochStats stats;
            stats.train_mse = epoch_mse / std::max(batches, 1);
            stats.val_r = validation_r(split.val);
            result.history.push_back(stats);
            ++result.epochs_run;

            if (stats.val_r > best_val) {
                best_val = stats.val_r;
                best_params = net_->params_flat();
                result.best_epoch = epoch;
                patience_left = trial_.patience;
            } else if (--patience_left <= 0) {
                break;
            }
        }

        if (!best_params.empty()) {
            net_->set_params_flat(best_params);
        }
        result.val_r = best_val;
        result.test_r = validation_r(split.test);
        return result;
    }

    std::size_t flat_param_count() {
        std::size_t n = 0;
        net_->for_each_block([&](std::span<Real> p, std::span<Real>) { n += p.size(); });
        return n;
    }

private:
    std::shared_ptr<const PreparedSplit<Real>> data_;
    TrialConfig trial_;
    std::unique_ptr<PlatoNet<Real>> net_;
    std::vector<int> batch_;
    double last_mse_ = 0.0;
};

// Adapts a fixed-batch training objective to the finite-difference checker.
class EngineObjective : public DiffFunction {
public:
    EngineObjective(TrainEngine<double>& engine, std::vector<int> indices)
        : engine_(engine), indices_(std::move(indices)) {}

    std::size_t param_count() const override {
        return const_cast<TrainEngine<double>&>(engine_).flat_param_count();
    }
    void get_params(std::span<double> out) const override {
        auto p = const_cast<TrainEngine<double>&>(engine_).net().params_flat();
        std::copy(p.begin(), p.end(), out.begin());
    }
    void set_params(std::span<const double> in) override {
        engine_.net().set_params_flat(in);
    }
    double value() override { return engine_.batch_objective(indices_, false); }
    double value_and_gradient(std::span<double> grad) override {
        const double v = engine_.batch_objective(indices_, true);
        auto g = engine_.net().grads_flat();
        std::copy(g.begin(), g.end(), grad.begin());
        return v;
    }

private:
    TrainEngine<double>& engine_;
    std::vector<int> indices_;
};

TrialResult train_trial(const TabularDataset& data, std::uint64_t split_seed,
                        const ModelInputs& inputs, const TrialConfig& trial, Precision precision);

// The no-KG ablation: a standard dense MLP trained with the same loop.
TrialResult fit_mlp_baseline(const TabularDataset& data, std::uint64_t split_seed,
                             const TrialConfig& trial, Precision precision);

// PLATO with a single linear unit on top of the inferred first layer.
TrialResult fit_plato_lr(const TabularDataset& data, std::uint64_t split_seed,
                         const ModelInputs& plato_inputs, const TrialConfig& trial,
                         Precision precision);

// One (trial, split, repeat) outcome in the search report.
struct RunRecord {
    std::string model;
    int trial_index = 0;
    nlohmann::json config;
    std::string config_hash;
    std::uint64_t split_seed = 0;
    int repeat = 0;
    std::uint64_t seed = 0;
    double val_r = 0.0;
    double test_r = 0.0;
    int epochs_run = 0;
    bool failed = false;
    std::string error;

    nlohmann::json to_json() const;
    static RunRecord from_json(const nlohmann::json& j);
};

struct SearchSummary {
    std::string model;
    std::string best_config_hash;
    nlohmann::json best_config;
    double mean_val = 0.0;
    double mean_test = 0.0;
    double std_test = 0.0;
    int n_runs = 0;
};

struct SearchReport {
    std::vector<RunRecord> records;

    SearchSummary summarize() const;
    void save_jsonl(const std::string& path) const;
    static SearchReport load_jsonl(const std::string& path);
};

std::string config_hash(const nlohmann::json& config);

struct SearchOptions {
    int n_trials = 30;
    int n_splits = 3;
    int n_repeats = 3;
    std::uint64_t master_seed = 0;
    SearchRanges ranges;
    Precision precision = Precision::Float64;
    int jobs = 1;
};

// Random search over Table-style ranges: n_trials configs, each trained on
// n_splits splits x n_repeats seeds. Selection is by mean validation PearsonR.
SearchReport run_search(const TabularDataset& data, const ModelInputs& inputs,
                        const std::string& model_name, const SearchOptions& options);

// Split seeds shared across models so comparisons use identical splits.
std::uint64_t search_split_seed(std::uint64_t master_seed, int split_index);

}  // namespace plato
