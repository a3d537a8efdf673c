#include "plato/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>

#include "plato/baselines.hpp"
#include "plato/manifest.hpp"

namespace plato {

nlohmann::json TrialConfig::to_json() const {
    return {
        {"learning_rate", learning_rate},
        {"batch_size", batch_size},
        {"l2", l2},
        {"rounds", rounds},
        {"beta", beta},
        {"attention_hidden", attention_hidden},
        {"b_layers", b_layers},
        {"b_hidden", b_hidden},
        {"total_layers", total_layers},
        {"hidden", hidden},
        {"sigma", to_string(sigma)},
        {"activation", to_string(activation)},
        {"max_epochs", max_epochs},
        {"patience", patience},
        {"seed", seed},
    };
}

TrialConfig TrialConfig::from_json(const nlohmann::json& j) {
    TrialConfig t;
    t.learning_rate = j.at("learning_rate").get<double>();
    t.batch_size = j.at("batch_size").get<int>();
    t.l2 = j.at("l2").get<double>();
    t.rounds = j.at("rounds").get<int>();
    t.beta = j.at("beta").get<double>();
    t.attention_hidden = j.at("attention_hidden").get<int>();
    t.b_layers = j.at("b_layers").get<int>();
    t.b_hidden = j.at("b_hidden").get<int>();
    t.total_layers = j.at("total_layers").get<int>();
    t.hidden = j.at("hidden").get<int>();
    t.sigma = activation_from_string(j.at("sigma").get<std::string>());
    t.activation = activation_from_string(j.at("activation").get<std::string>());
    t.max_epochs = j.at("max_epochs").get<int>();
    t.patience = j.at("patience").get<int>();
    t.seed = j.at("seed").get<std::uint64_t>();
    return t;
}

SearchRanges SearchRanges::paper() { return SearchRanges{}; }

SearchRanges SearchRanges::desk() {
    SearchRanges r;
    // Scaled for the d=2000 / n=100 synthetic benchmark: widths small enough
    // that the inferred first layer stays far below the dense parameter count,
    // and epochs short enough for a 30-trial search to finish on a laptop.
    r.beta_hi = 0.5;
    r.attention_hidden_lo = 8;
    r.attention_hidden_hi = 32;
    r.b_layers_hi = 3;
    r.b_hidden_lo = 16;
    r.b_hidden_hi = 32;
    r.total_layers_hi = 3;
    r.hidden_lo = 16;
    r.hidden_hi = 32;
    r.max_epochs = 80;
    r.patience = 10;
    return r;
}

TrialConfig sample_config(Rng& rng, const SearchRanges& ranges) {
    TrialConfig t;
    t.learning_rate = rng.log_uniform(ranges.lr_lo, ranges.lr_hi);
    t.batch_size = ranges.batch_sizes[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(ranges.batch_sizes.size()) - 1))];
    t.l2 = rng.bernoulli(ranges.l2_zero_prob) ? 0.0 : rng.log_uniform(ranges.l2_lo, ranges.l2_hi);
    t.rounds = ranges.rounds;
    t.beta = rng.log_uniform(ranges.beta_lo, ranges.beta_hi);
    t.attention_hidden =
        static_cast<int>(rng.uniform_int(ranges.attention_hidden_lo, ranges.attention_hidden_hi));
    t.b_layers = static_cast<int>(rng.uniform_int(ranges.b_layers_lo, ranges.b_layers_hi));
    t.b_hidden = static_cast<int>(rng.uniform_int(ranges.b_hidden_lo, ranges.b_hidden_hi));
    t.total_layers =
        static_cast<int>(rng.uniform_int(ranges.total_layers_lo, ranges.total_layers_hi));
    t.hidden = static_cast<int>(rng.uniform_int(ranges.hidden_lo, ranges.hidden_hi));
    t.max_epochs = ranges.max_epochs;
    t.patience = ranges.patience;
    return t;
}

ModelInputs ModelInputs::mlp() {
    ModelInputs in;
    in.kind = ModelKind::Mlp;
    return in;
}

ModelInputs ModelInputs::plato(ModelKind kind, std::shared_ptr<const FeatureEmbeddings> m,
                               const KnowledgeGraph& feature_kg) {
    ModelInputs in;
    in.kind = kind;
    in.m = std::move(m);
    in.graph = std::make_shared<FeatureGraphCsr>(build_feature_csr(feature_kg));
    in.row_of_feature.resize(feature_kg.node_count());
    for (int j = 0; j < feature_kg.node_count(); ++j) {
        in.row_of_feature[j] = j;
    }
    in.feature_kg = std::make_shared<KnowledgeGraph>(feature_kg);
    return in;
}

ModelInputs ModelInputs::plato_full_graph(ModelKind kind, const NodeEmbeddingTable& table,
                                          const KnowledgeGraph& kg, const FeatureMapping& fm) {
    ModelInputs in;
    in.kind = kind;
    auto m = std::make_shared<FeatureEmbeddings>();
    m->d = kg.node_count();
    m->c = table.c;
    m->values = table.entities;
    in.m = std::move(m);
    in.graph = std::make_shared<FeatureGraphCsr>(build_feature_csr(kg));
    in.row_of_feature = fm.node_of_feature;
    return in;
}

TrialResult train_trial(const TabularDataset& data, std::uint64_t split_seed,
                        const ModelInputs& inputs, const TrialConfig& trial,
                        Precision precision) {
    if (precision == Precision::Float64) {
        TrainEngine<double> engine(prepare_split<double>(data, split_seed), inputs, trial);
        return engine.run();
    }
    TrainEngine<float> engine(prepare_split<float>(data, split_seed), inputs, trial);
    return engine.run();
}

TrialResult fit_mlp_baseline(const TabularDataset& data, std::uint64_t split_seed,
                             const TrialConfig& trial, Precision precision) {
    return train_trial(data, split_seed, ModelInputs::mlp(), trial, precision);
}

TrialResult fit_plato_lr(const TabularDataset& data, std::uint64_t split_seed,
                         const ModelInputs& plato_inputs, const TrialConfig& trial,
                         Precision precision) {
    ModelInputs inputs = plato_inputs;
    inputs.kind = ModelKind::PlatoLr;
    return train_trial(data, split_seed, inputs, trial, precision);
}

nlohmann::json RunRecord::to_json() const {
    return {
        {"model", model},
        {"trial_index", trial_index},
        {"config", config},
        {"config_hash", config_hash},
        {"split_seed", split_seed},
        {"repeat", repeat},
        {"seed", seed},
        {"val_pearson_r", val_r},
        {"test_pearson_r", test_r},
        {"epochs_run", epochs_run},
        {"failed", failed},
        {"error", error},
    };
}

RunRecord RunRecord::from_json(const nlohmann::json& j) {
    RunRecord r;
    r.model = j.at("model").get<std::string>();
    r.trial_index = j.at("trial_index").get<int>();
    r.config = j.at("config");
    r.config_hash = j.at("config_hash").get<std::string>();
    r.split_seed = j.at("split_seed").get<std::uint64_t>();
    r.repeat = j.at("repeat").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.val_r = j.at("val_pearson_r").get<double>();
    r.test_r = j.at("test_pearson_r").get<double>();
    r.epochs_run = j.at("epochs_run").get<int>();
    r.failed = j.at("failed").get<bool>();
    r.error = j.at("error").get<std::string>();
    return r;
}

std::string config_hash(const nlohmann::json& config) {
    const std::string dump = config.dump();
    return checksum_bytes(dump);
}

SearchSummary SearchReport::summarize() const {
    if (records.empty()) {
        throw ValidationError("cannot summarize an empty report");
    }
    struct Group {
        std::vector<double> val, test;
        bool any_failed = false;
        int trial_index = 0;
        nlohmann::json config;
        std::string model;
    };
    std::map<std::string, Group> groups;
    for (const auto& r : records) {
        auto& g = groups[r.config_hash];
        g.trial_index = r.trial_index;
        g.config = r.config;
        g.model = r.model;
        if (r.failed) {
            g.any_failed = true;
        } else {
            g.val.push_back(r.val_r);
            g.test.push_back(r.test_r);
        }
    }

    const Group* best = nullptr;
    std::string best_hash;
    double best_mean = -2.0;
    for (const auto& [hash, g] : groups) {
        if (g.any_failed || g.val.empty()) {
            continue;  // configs with any failed run are disqualified
        }
        double mean = 0.0;
        for (double v : g.val) {
            mean += v;
        }
        mean /= static_cast<double>(g.val.size());
        if (best == nullptr || mean > best_mean ||
            (mean == best_mean && g.trial_index < best->trial_index)) {
            best = &g;
            best_hash = hash;
            best_mean = mean;
        }
    }
    if (best == nullptr) {
        std::string details;
        for (const auto& r : records) {
            if (r.failed) {
                details += "\n  trial " + std::to_string(r.trial_index) + ": " + r.error;
            }
        }
        throw RuntimeFailure("every searched configuration failed:" + details);
    }

    SearchSummary s;
    s.model = best->model;
    s.best_config_hash = best_hash;
    s.best_config = best->config;
    s.mean_val = best_mean;
    s.n_runs = static_cast<int>(best->test.size());
    for (double v : best->test) {
        s.mean_test += v;
    }
    s.mean_test /= s.n_runs;
    double var = 0.0;
    for (double v : best->test) {
        var += (v - s.mean_test) * (v - s.mean_test);
    }
    // std over all (split, repeat) values
    s.std_test = std::sqrt(var / s.n_runs);
    return s;
}

void SearchReport::save_jsonl(const std::string& path) const {
    std::ofstream out(path);
    if (!out) {
        throw RuntimeFailure("cannot write report: " + path);
    }
    for (const auto& r : records) {
        out << r.to_json().dump() << "\n";
    }
}

SearchReport SearchReport::load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open report: " + path);
    }
    SearchReport report;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            report.records.push_back(RunRecord::from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return report;
}

std::uint64_t search_split_seed(std::uint64_t master_seed, int split_index) {
    return derive_seed(master_seed, {0x53504c54u /* "SPLT" */,
                                     static_cast<std::uint64_t>(split_index)});
}

namespace {

bool is_neural_model(const std::string& name) {
    return name == "plato" || name == "plato-no-mp" || name == "plato-lr" || name == "mlp";
}

ModelKind neural_kind(const std::string& name) {
    if (name == "plato") return ModelKind::Plato;
    if (name == "plato-no-mp") return ModelKind::PlatoNoMp;
    if (name == "plato-lr") return ModelKind::PlatoLr;
    if (name == "mlp") return ModelKind::Mlp;
    throw ConfigError("unknown neural model: " + name);
}

struct LinearTrial {
    double lambda_l2 = 0.0;
    double lambda_l1 = 0.0;
    double lambda_graph = 0.0;

    nlohmann::json to_json(const std::string& model) const {
        nlohmann::json j{{"model", model}};
        if (model == "ridge") {
            j["lambda_l2"] = lambda_l2;
        } else if (model == "lasso") {
            j["lambda_l1"] = lambda_l1;
        } else {
            j["lambda_graph"] = lambda_graph;
            j["lambda_l1"] = lambda_l1;
        }
        return j;
    }
};

LinearTrial sample_linear_trial(Rng& rng, const SearchRanges& ranges, const std::string& model) {
    LinearTrial t;
    if (model == "ridge") {
        t.lambda_l2 = rng.log_uniform(ranges.ridge_l2_lo, ranges.ridge_l2_hi);
    } else if (model == "lasso") {
        t.lambda_l1 = rng.log_uniform(ranges.lasso_l1_lo, ranges.lasso_l1_hi);
    } else {
        t.lambda_graph = rng.bernoulli(ranges.graph_lambda_zero_prob)
                             ? 0.0
                             : rng.log_uniform(ranges.graph_lambda_lo, ranges.graph_lambda_hi);
        t.lambda_l1 = rng.bernoulli(ranges.graph_l1_zero_prob)
                          ? 0.0
                          : rng.log_uniform(ranges.graph_l1_lo, ranges.graph_l1_hi);
    }
    return t;
}

struct LinearEval {
    double val_r = 0.0;
    double test_r = 0.0;
};

LinearEval evaluate_linear(const TabularDataset& data, const SplitSpec& split,
                           const LinearModel& model) {
    auto metric = [&](const std::vector<int>& idx) {
        std::vector<double> truth, pred;
        truth.reserve(idx.size());
        pred.reserve(idx.size());
        for (int i : idx) {
            truth.push_back(data.y[i]);
            pred.push_back(model.predict_one({data.x.row(i),
                                              static_cast<std::size_t>(data.x.cols)}));
        }
        return pearson_r(truth, pred);
    };
    return {metric(split.val), metric(split.test)};
}

Tensor2<double> gather_rows(const Tensor2<double>& x, const std::vector<int>& idx) {
    Tensor2<double> out(static_cast<int>(idx.size()), x.cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        std::copy(x.row(idx[i]), x.row(idx[i]) + x.cols, out.row(static_cast<int>(i)));
    }
    return out;
}

template <class Real>
void run_neural_search(const TabularDataset& data, const ModelInputs& inputs,
                       const std::string& model_name, const SearchOptions& options,
                       SearchReport& report) {
    // Shared read-only prepared splits.
    std::vector<std::shared_ptr<const PreparedSplit<Real>>> prepared;
    std::vector<std::uint64_t> split_seeds;
    for (int s = 0; s < options.n_splits; ++s) {
        split_seeds.push_back(search_split_seed(options.master_seed, s));
        prepared.push_back(prepare_split<Real>(data, split_seeds.back()));
    }

    std::vector<TrialConfig> configs;
    for (int t = 0; t < options.n_trials; ++t) {
        Rng rng(derive_seed(options.master_seed, {0x636667u /* "cfg" */,
                                                  static_cast<std::uint64_t>(t)}));
        configs.push_back(sample_config(rng, options.ranges));
    }

    struct Task {
        int trial, split, repeat;
    };
    std::vector<Task> tasks;
    for (int t = 0; t < options.n_trials; ++t) {
        for (int s = 0; s < options.n_splits; ++s) {
            for (int r = 0; r < options.n_repeats; ++r) {
                tasks.push_back({t, s, r});
            }
        }
    }
    report.records.resize(tasks.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) {
                return;
            }
            const Task& task = tasks[i];
            TrialConfig trial = configs[task.trial];
            trial.seed = derive_seed(options.master_seed,
                                     {0x72756eu /* "run" */,
                                      static_cast<std::uint64_t>(task.trial),
                                      static_cast<std::uint64_t>(task.split),
                                      static_cast<std::uint64_t>(task.repeat)});
            RunRecord rec;
            rec.model = model_name;
            rec.trial_index = task.trial;
            rec.config = configs[task.trial].to_json();
            rec.config.erase("seed");  // the per-run seed is recorded separately
            rec.config_hash = config_hash(rec.config);
            rec.split_seed = split_seeds[task.split];
            rec.repeat = task.repeat;
            rec.seed = trial.seed;
            try {
                TrainEngine<Real> engine(prepared[task.split], inputs, trial);
                const TrialResult result = engine.run();
                rec.val_r = result.val_r;
                rec.test_r = result.test_r;
                rec.epochs_run = result.epochs_run;
                rec.failed = result.failed;
                rec.error = result.error;
            } catch (const std::exception& e) {
                rec.failed = true;
                rec.error = e.what();
            }
            report.records[i] = std::move(rec);
        }
    };

    const int jobs = std::max(1, options.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
}

void run_linear_search(const TabularDataset& data, const ModelInputs& inputs,
                       const std::string& model_name, const SearchOptions& options,
                       SearchReport& report) {
    const PenaltyKind kind = penalty_from_string(model_name);
    const bool needs_graph = kind == PenaltyKind::GraphNet || kind == PenaltyKind::NcLasso ||
                             kind == PenaltyKind::NetworkLasso;
    if (needs_graph && !inputs.feature_kg) {
        throw ConfigError(model_name + " requires the collapsed feature graph");
    }

    std::vector<std::uint64_t> split_seeds;
    std::vector<SplitSpec> splits;
    for (int s = 0; s < options.n_splits; ++s) {
        split_seeds.push_back(search_split_seed(options.master_seed, s));
        splits.push_back(split_dataset(data.n(), split_seeds.back()));
    }

    for (int t = 0; t < options.n_trials; ++t) {
        Rng rng(derive_seed(options.master_seed, {0x636667u, static_cast<std::uint64_t>(t)}));
        const LinearTrial trial = sample_linear_trial(rng, options.ranges, model_name);
        const nlohmann::json config = trial.to_json(model_name);
        const std::string hash = config_hash(config);
        for (int s = 0; s < options.n_splits; ++s) {
            // Deterministic fits: repeats collapse to one run per split.
            RunRecord rec;
            rec.model = model_name;
            rec.trial_index = t;
            rec.config = config;
            rec.config_hash = hash;
            rec.split_seed = split_seeds[s];
            rec.repeat = 0;
            try {
                const auto x_train = gather_rows(data.x, splits[s].train);
                std::vector<double> y_train;
                for (int i : splits[s].train) {
                    y_train.push_back(data.y[i]);
                }
                LinearModel model;
                switch (kind) {
                    case PenaltyKind::Ridge:
                        model = fit_ridge(x_train, y_train, trial.lambda_l2);
                        break;
                    case PenaltyKind::Lasso:
                        model = fit_lasso(x_train, y_train, trial.lambda_l1);
                        break;
                    default:
                        model = fit_graph_regularized(x_train, y_train, *inputs.feature_kg, kind,
                                                      trial.lambda_graph, trial.lambda_l1);
                        break;
                }
                const LinearEval eval = evaluate_linear(data, splits[s], model);
                rec.val_r = eval.val_r;
                rec.test_r = eval.test_r;
            } catch (const std::exception& e) {
                rec.failed = true;
                rec.error = e.what();
            }
            report.records.push_back(std::move(rec));
        }
    }
}

}  // namespace

SearchReport run_search(const TabularDataset& data, const ModelInputs& inputs,
                        const std::string& model_name, const SearchOptions& options) {
    if (options.n_trials < 1) {
        throw ConfigError("n_trials must be >= 1");
    }
    if (options.n_splits < 1 || options.n_repeats < 1) {
        throw ConfigError("n_splits and n_repeats must be >= 1");
    }
    SearchReport report;
    if (is_neural_model(model_name)) {
        ModelInputs neural = inputs;
        neural.kind = neural_kind(model_name);
        if (options.precision == Precision::Float64) {
            run_neural_search<double>(data, neural, model_name, options, report);
        } else {
            run_neural_search<float>(data, neural, model_name, options, report);
        }
    } else {
        run_linear_search(data, inputs, model_name, options, report);
    }
    return report;
}

}  // namespace plato
