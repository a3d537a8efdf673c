// Command-line pipeline: gen-synth, pretrain, train, search, report.
// Exit codes: 0 success, 1 runtime failure, 2 usage/validation error.

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "plato/baselines.hpp"
#include "plato/data.hpp"
#include "plato/embed.hpp"
#include "plato/errors.hpp"
#include "plato/kg.hpp"
#include "plato/manifest.hpp"
#include "plato/model_io.hpp"
#include "plato/synth.hpp"
#include "plato/train.hpp"

namespace {

using namespace plato;

std::string now_iso8601() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

struct KgFlags {
    std::string triples_path;
    std::string feature_map_path;
    double keep_fraction = 1.0;
    std::uint64_t drop_seed = 0;
};

void add_kg_flags(CLI::App* cmd, KgFlags& flags, bool required) {
    auto* kg = cmd->add_option("--kg", flags.triples_path, "Triples TSV (head, relation, tail)");
    auto* fm = cmd->add_option("--feature-map", flags.feature_map_path,
                               "Feature map TSV (feature_name, node_label)");
    if (required) {
        kg->required();
        fm->required();
    }
    cmd->add_option("--kg-keep-fraction", flags.keep_fraction,
                    "Keep this fraction of KG edges (edge-dropout protocol)");
    cmd->add_option("--kg-drop-seed", flags.drop_seed, "Seed for the edge dropout");
}

LoadedKg load_kg_with_drop(const KgFlags& flags) {
    LoadedKg loaded = load_kg(flags.triples_path, flags.feature_map_path);
    if (flags.keep_fraction < 1.0) {
        loaded.kg = drop_edges(loaded.kg, flags.keep_fraction, flags.drop_seed);
    }
    return loaded;
}

struct TrialFlags {
    double lr = 1e-3;
    int batch = 32;
    double l2 = 0.0;
    int rounds = 2;
    double beta = 0.01;
    int attention_hidden = 16;
    int b_layers = 2;
    int b_hidden = 32;
    int total_layers = 2;
    int hidden = 32;
    std::string sigma = "identity";
    std::string activation = "relu";
    int epochs = 200;
    int patience = 20;
};

void add_trial_flags(CLI::App* cmd, TrialFlags& f) {
    cmd->add_option("--lr", f.lr, "Learning rate");
    cmd->add_option("--batch", f.batch, "Batch size");
    cmd->add_option("--l2", f.l2, "L2 penalty on trainable weights");
    cmd->add_option("--rounds", f.rounds, "Message-passing rounds R");
    cmd->add_option("--beta", f.beta, "Neighbor weight beta in [0,1]");
    cmd->add_option("--attention-hidden", f.attention_hidden, "Hidden width of the attention net");
    cmd->add_option("--b-layers", f.b_layers, "Affine layers in the weight-inference net");
    cmd->add_option("--b-hidden", f.b_hidden, "Hidden width of the weight-inference net");
    cmd->add_option("--layers", f.total_layers, "Total MLP layers L");
    cmd->add_option("--hidden", f.hidden, "First-layer width h (and upper hidden width)");
    cmd->add_option("--sigma", f.sigma, "Message-passing nonlinearity")
        ->check(CLI::IsMember({"identity", "tanh", "relu"}));
    cmd->add_option("--activation", f.activation, "MLP activation")
        ->check(CLI::IsMember({"identity", "tanh", "relu"}));
    cmd->add_option("--epochs", f.epochs, "Maximum training epochs");
    cmd->add_option("--patience", f.patience, "Early-stopping patience (epochs)");
}

TrialConfig trial_from_flags(const TrialFlags& f, std::uint64_t seed) {
    TrialConfig t;
    t.learning_rate = f.lr;
    t.batch_size = f.batch;
    t.l2 = f.l2;
    t.rounds = f.rounds;
    t.beta = f.beta;
    t.attention_hidden = f.attention_hidden;
    t.b_layers = f.b_layers;
    t.b_hidden = f.b_hidden;
    t.total_layers = f.total_layers;
    t.hidden = f.hidden;
    t.sigma = activation_from_string(f.sigma);
    t.activation = activation_from_string(f.activation);
    t.max_epochs = f.epochs;
    t.patience = f.patience;
    t.seed = seed;
    return t;
}

int cmd_gen_synth(const SynthConfig& cfg, const std::string& out_dir,
                  const std::string& label) {
    const SyntheticData data = generate(cfg);
    write_synthetic(data, out_dir, label);

    RunManifest manifest;
    manifest.command = "gen-synth";
    manifest.config = {{"d", cfg.d},
                       {"n", cfg.n},
                       {"c_latent", cfg.c_latent},
                       {"h_true", cfg.h_true},
                       {"n_communities", cfg.n_communities},
                       {"p_intra", cfg.p_intra},
                       {"p_inter", cfg.p_inter},
                       {"n_broader", cfg.n_broader},
                       {"noise_std", cfg.noise_std},
                       {"label", label}};
    manifest.seed = cfg.seed;
    manifest.timestamp = now_iso8601();
    for (const char* name : {"triples.tsv", "feature_map.tsv", "dataset.csv",
                             "ground_truth.json"}) {
        manifest.add_output(out_dir + "/" + name);
    }
    manifest.save(out_dir + "/run_manifest.json");

    const SynthSummary s = describe(data);
    std::printf("wrote %s: d=%d n=%d d/n=%.1f feature_edges=%d hub_edges=%d "
                "within_cos=%.3f between_cos=%.3f\n",
                out_dir.c_str(), cfg.d, cfg.n, s.d_over_n, s.feature_edges, s.hub_edges,
                s.within_cosine, s.between_cosine);
    return 0;
}

int cmd_pretrain(const KgFlags& kg_flags, PretrainConfig cfg, const std::string& method,
                 const std::string& scope, const std::string& out_dir) {
    cfg.method = embed_method_from_string(method);
    LoadedKg loaded = load_kg_with_drop(kg_flags);

    const KnowledgeGraph* graph = &loaded.kg;
    KnowledgeGraph feature_graph;
    if (scope == "feature-only") {
        feature_graph = induce_feature_subgraph(loaded.kg, loaded.mapping);
        graph = &feature_graph;
    }

    const PretrainResult result = pretrain(*graph, cfg);
    std::filesystem::create_directories(out_dir);
    save_embedding_artifact(result.table, out_dir, cfg.seed, scope);

    RunManifest manifest;
    manifest.command = "pretrain";
    manifest.config = {{"method", method},
                       {"c", cfg.c},
                       {"negatives", cfg.negatives_per_positive},
                       {"epochs", cfg.epochs},
                       {"lr", cfg.learning_rate},
                       {"batch", cfg.batch_size},
                       {"l2", cfg.l2},
                       {"graph_scope", scope},
                       {"kg_keep_fraction", kg_flags.keep_fraction},
                       {"kg_drop_seed", kg_flags.drop_seed}};
    manifest.seed = cfg.seed;
    manifest.timestamp = now_iso8601();
    manifest.add_input(kg_flags.triples_path);
    manifest.add_input(kg_flags.feature_map_path);
    for (const char* name : {"manifest.json", "entities.bin", "relations.bin"}) {
        manifest.add_output(out_dir + "/" + std::string(name));
    }
    manifest.save(out_dir + "/run_manifest.json");

    std::printf("pretrained %s on %s graph: %d nodes, %d relations, %zu edges, "
                "final epoch loss %.4f\n",
                method.c_str(), scope.c_str(), graph->node_count(), graph->relation_count(),
                graph->edges().size(), result.epoch_loss.back());
    return 0;
}

// Resolves the model inputs for one ablation mode.
ModelInputs build_inputs(const std::string& ablation, const std::string& mp_graph,
                         const LoadedKg* loaded, const std::string& embeddings_dir) {
    if (ablation == "no-kg") {
        return ModelInputs::mlp();
    }
    if (loaded == nullptr) {
        throw ValidationError("--kg and --feature-map are required unless --ablation no-kg");
    }
    if (embeddings_dir.empty()) {
        throw ValidationError("--embeddings is required unless --ablation no-kg");
    }
    const EmbeddingArtifactInfo info = read_embedding_info(embeddings_dir);
    const NodeEmbeddingTable table = load_embedding_artifact(embeddings_dir);

    ModelKind kind = ModelKind::Plato;
    if (ablation == "no-mp") {
        kind = ModelKind::PlatoNoMp;
    } else if (ablation == "plato-lr") {
        kind = ModelKind::PlatoLr;
    } else if (ablation != "none" && ablation != "feature-only-kg") {
        throw ValidationError("unknown ablation: " + ablation);
    }

    const KnowledgeGraph feature_graph = induce_feature_subgraph(loaded->kg, loaded->mapping);

    if (ablation == "feature-only-kg") {
        if (info.graph_scope != "feature-only") {
            throw ValidationError("--ablation feature-only-kg needs an embedding artifact "
                                  "pretrained with --graph-scope feature-only");
        }
        if (info.node_count != loaded->mapping.feature_count()) {
            throw ValidationError("feature-only embedding artifact does not match the feature "
                                  "count");
        }
        auto m = std::make_shared<FeatureEmbeddings>(
            extract_feature_embeddings(table, FeatureMapping::identity(loaded->mapping.feature_names)));
        return ModelInputs::plato(ModelKind::Plato, std::move(m), feature_graph);
    }

    if (info.graph_scope != "full") {
        throw ValidationError("--ablation " + ablation +
                              " needs an embedding artifact pretrained on the full KG");
    }
    if (info.node_count != loaded->kg.node_count()) {
        throw ValidationError("embedding artifact node count does not match the KG");
    }
    if (mp_graph == "full-imputed") {
        if (kind == ModelKind::PlatoNoMp) {
            throw ValidationError("--mp-graph full-imputed has no effect with --ablation no-mp");
        }
        return ModelInputs::plato_full_graph(kind, table, loaded->kg, loaded->mapping);
    }
    auto m = std::make_shared<FeatureEmbeddings>(
        extract_feature_embeddings(table, loaded->mapping));
    return ModelInputs::plato(kind, std::move(m), feature_graph);
}

int cmd_train(const std::string& dataset_path, const std::string& label, const KgFlags& kg_flags,
              const std::string& embeddings_dir, const std::string& ablation,
              const std::string& mp_graph, const TrialFlags& trial_flags,
              std::uint64_t split_seed, std::uint64_t seed, const std::string& precision_name,
              const std::string& out_dir) {
    const Precision precision = precision_from_string(precision_name);
    TabularDataset data = load_dataset_csv(dataset_path, label);

    std::optional<LoadedKg> loaded;
    if (!kg_flags.triples_path.empty()) {
        loaded = load_kg_with_drop(kg_flags);
        data = align_to_mapping(data, loaded->mapping);
    } else if (ablation != "no-kg") {
        throw ValidationError("--kg and --feature-map are required unless --ablation no-kg");
    }

    const ModelInputs inputs =
        build_inputs(ablation, mp_graph, loaded ? &*loaded : nullptr, embeddings_dir);
    const TrialConfig trial = trial_from_flags(trial_flags, seed);

    std::filesystem::create_directories(out_dir);
    TrialResult result;
    std::string m_ref_checksum;
    if (!embeddings_dir.empty() && ablation != "no-kg") {
        m_ref_checksum = checksum_file(embeddings_dir + "/entities.bin");
    }
    if (precision == Precision::Float64) {
        TrainEngine<double> engine(prepare_split<double>(data, split_seed), inputs, trial);
        result = engine.run();
        save_model_artifact(engine.net(), out_dir, seed, precision, embeddings_dir,
                            m_ref_checksum);
    } else {
        TrainEngine<float> engine(prepare_split<float>(data, split_seed), inputs, trial);
        result = engine.run();
        save_model_artifact(engine.net(), out_dir, seed, precision, embeddings_dir,
                            m_ref_checksum);
    }

    nlohmann::json metrics;
    metrics["ablation"] = ablation;
    metrics["config"] = trial.to_json();
    metrics["split_seed"] = split_seed;
    metrics["precision"] = precision_name;
    metrics["val_pearson_r"] = result.val_r;
    metrics["test_pearson_r"] = result.test_r;
    metrics["epochs_run"] = result.epochs_run;
    metrics["best_epoch"] = result.best_epoch;
    metrics["failed"] = result.failed;
    metrics["error"] = result.error;
    nlohmann::json history = nlohmann::json::array();
    for (const auto& e : result.history) {
        history.push_back({{"train_mse", e.train_mse}, {"val_pearson_r", e.val_r}});
    }
    metrics["history"] = history;
    {
        std::ofstream out(out_dir + "/metrics.json");
        out << metrics.dump(2) << "\n";
    }

    RunManifest manifest;
    manifest.command = "train";
    manifest.config = trial.to_json();
    manifest.config["ablation"] = ablation;
    manifest.config["mp_graph"] = mp_graph;
    manifest.config["split_seed"] = split_seed;
    manifest.seed = seed;
    manifest.precision = precision_name;
    manifest.timestamp = now_iso8601();
    manifest.add_input(dataset_path);
    if (!kg_flags.triples_path.empty()) {
        manifest.add_input(kg_flags.triples_path);
        manifest.add_input(kg_flags.feature_map_path);
    }
    if (!embeddings_dir.empty() && ablation != "no-kg") {
        manifest.add_input(embeddings_dir + "/entities.bin");
    }
    manifest.add_output(out_dir + "/metrics.json");
    manifest.add_output(out_dir + "/model.json");
    manifest.add_output(out_dir + "/params.bin");
    manifest.save(out_dir + "/run_manifest.json");

    if (result.failed) {
        std::fprintf(stderr, "trial failed: %s\n", result.error.c_str());
        return 1;
    }
    std::printf("val PearsonR %.4f, test PearsonR %.4f (%d epochs, best %d)\n", result.val_r,
                result.test_r, result.epochs_run, result.best_epoch);
    return 0;
}

int cmd_search(const std::string& dataset_path, const std::string& label,
               const KgFlags& kg_flags, const std::string& embeddings_dir,
               const std::string& model, const std::string& model_label,
               const std::string& mp_graph, SearchOptions options,
               const std::string& ranges_name, const std::string& precision_name,
               const std::string& out_path) {
    options.precision = precision_from_string(precision_name);
    options.ranges = ranges_name == "desk" ? SearchRanges::desk() : SearchRanges::paper();

    TabularDataset data = load_dataset_csv(dataset_path, label);
    std::optional<LoadedKg> loaded;
    if (!kg_flags.triples_path.empty()) {
        loaded = load_kg_with_drop(kg_flags);
        data = align_to_mapping(data, loaded->mapping);
    }

    ModelInputs inputs;
    const bool neural_kg = model == "plato" || model == "plato-no-mp" || model == "plato-lr";
    const bool graph_baseline =
        model == "graphnet" || model == "nc-lasso" || model == "network-lasso";
    if (neural_kg) {
        std::string ablation = "none";
        if (!embeddings_dir.empty() &&
            read_embedding_info(embeddings_dir).graph_scope == "feature-only") {
            ablation = "feature-only-kg";
        } else if (model == "plato-no-mp") {
            ablation = "no-mp";
        } else if (model == "plato-lr") {
            ablation = "plato-lr";
        }
        inputs = build_inputs(ablation, mp_graph, loaded ? &*loaded : nullptr, embeddings_dir);
        if (model == "plato-no-mp") {
            inputs.kind = ModelKind::PlatoNoMp;
        } else if (model == "plato-lr") {
            inputs.kind = ModelKind::PlatoLr;
        }
    } else if (model == "mlp") {
        inputs = ModelInputs::mlp();
    } else if (graph_baseline) {
        if (!loaded) {
            throw ValidationError(model + " requires --kg and --feature-map");
        }
        inputs.feature_kg = std::make_shared<KnowledgeGraph>(
            induce_feature_subgraph(loaded->kg, loaded->mapping));
    }

    SearchReport report = run_search(data, inputs, model, options);
    if (!model_label.empty()) {
        for (auto& r : report.records) {
            r.model = model_label;
        }
    }
    report.save_jsonl(out_path);

    RunManifest manifest;
    manifest.command = "search";
    manifest.config = {{"model", model},
                       {"model_label", model_label},
                       {"trials", options.n_trials},
                       {"splits", options.n_splits},
                       {"repeats", options.n_repeats},
                       {"ranges", ranges_name},
                       {"mp_graph", mp_graph},
                       {"kg_keep_fraction", kg_flags.keep_fraction},
                       {"kg_drop_seed", kg_flags.drop_seed}};
    manifest.seed = options.master_seed;
    manifest.precision = precision_name;
    manifest.timestamp = now_iso8601();
    manifest.add_input(dataset_path);
    if (!kg_flags.triples_path.empty()) {
        manifest.add_input(kg_flags.triples_path);
        manifest.add_input(kg_flags.feature_map_path);
    }
    if (!embeddings_dir.empty() && neural_kg) {
        manifest.add_input(embeddings_dir + "/entities.bin");
    }
    manifest.add_output(out_path);
    manifest.save(out_path + ".manifest.json");

    const SearchSummary s = report.summarize();
    std::printf("%s: best config %s, val %.4f, test %.3f +/- %.3f over %d runs\n",
                s.model.c_str(), s.best_config_hash.c_str(), s.mean_val, s.mean_test, s.std_test,
                s.n_runs);
    return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_path,
               const std::string& csv_path) {
    if (inputs.empty()) {
        throw ValidationError("report needs at least one JSON-lines input");
    }
    std::map<std::string, SearchReport> by_model;
    for (const auto& path : inputs) {
        const SearchReport r = SearchReport::load_jsonl(path);
        if (r.records.empty()) {
            throw ValidationError(path + ": empty report");
        }
        for (const auto& rec : r.records) {
            by_model[rec.model].records.push_back(rec);
        }
    }
    std::vector<SearchSummary> summaries;
    for (auto& [model, report] : by_model) {
        summaries.push_back(report.summarize());
    }
    std::sort(summaries.begin(), summaries.end(),
              [](const SearchSummary& a, const SearchSummary& b) {
                  return a.mean_test > b.mean_test;
              });

    std::string table = "model                 test PearsonR      val      runs  config\n";
    for (const auto& s : summaries) {
        char line[256];
        std::snprintf(line, sizeof line, "%-20s %6.3f +/- %.3f  %8.3f  %4d  %s\n",
                      s.model.c_str(), s.mean_test, s.std_test, s.mean_val, s.n_runs,
                      s.best_config_hash.c_str());
        table += line;
    }
    if (out_path.empty()) {
        std::fputs(table.c_str(), stdout);
    } else {
        std::ofstream out(out_path);
        out << table;
    }
    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        csv << "model,test_mean,test_std,val_mean,n_runs,config_hash\n";
        for (const auto& s : summaries) {
            csv << s.model << ',' << s.mean_test << ',' << s.std_test << ',' << s.mean_val << ','
                << s.n_runs << ',' << s.best_config_hash << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PLATO: KG-regularized MLPs for d >> n tabular regression"};
    app.require_subcommand(1);

    // gen-synth
    SynthConfig synth_cfg;
    std::string synth_out, synth_label = "label";
    auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic dataset + KG benchmark");
    gen->add_option("--d", synth_cfg.d, "Feature count");
    gen->add_option("--n", synth_cfg.n, "Sample count");
    gen->add_option("--c-latent", synth_cfg.c_latent, "Latent dimension");
    gen->add_option("--h-true", synth_cfg.h_true, "True hidden width");
    gen->add_option("--communities", synth_cfg.n_communities, "Community count");
    gen->add_option("--p-intra", synth_cfg.p_intra, "Intra-community edge probability");
    gen->add_option("--p-inter", synth_cfg.p_inter, "Inter-community edge probability");
    gen->add_option("--broader", synth_cfg.n_broader, "Broader-domain hub nodes");
    gen->add_option("--noise-std", synth_cfg.noise_std, "Label noise std");
    gen->add_option("--seed", synth_cfg.seed, "Seed");
    gen->add_option("--label", synth_label, "Label column name");
    gen->add_option("--out", synth_out, "Output directory")->required();

    // pretrain
    KgFlags pre_kg;
    PretrainConfig pre_cfg;
    std::string pre_method = "complex", pre_scope = "full", pre_out;
    auto* pre = app.add_subcommand("pretrain", "Pretrain KG node embeddings");
    add_kg_flags(pre, pre_kg, /*required=*/true);
    pre->add_option("--method", pre_method, "Embedding model")
        ->check(CLI::IsMember({"complex", "distmult", "transe"}));
    pre->add_option("--c", pre_cfg.c, "Embedding dimension");
    pre->add_option("--negatives", pre_cfg.negatives_per_positive, "Negatives per positive");
    pre->add_option("--epochs", pre_cfg.epochs, "Training epochs");
    pre->add_option("--lr", pre_cfg.learning_rate, "SGD learning rate");
    pre->add_option("--batch", pre_cfg.batch_size, "Batch size");
    pre->add_option("--l2", pre_cfg.l2, "Embedding L2 penalty");
    pre->add_option("--seed", pre_cfg.seed, "Seed");
    pre->add_option("--graph-scope", pre_scope, "Pretrain on the full KG or feature subgraph")
        ->check(CLI::IsMember({"full", "feature-only"}));
    pre->add_option("--out", pre_out, "Output artifact directory")->required();

    // train
    KgFlags train_kg;
    TrialFlags trial_flags;
    std::string train_dataset, train_label = "label", train_embeddings, train_out;
    std::string train_ablation = "none", train_mp_graph = "feature", train_precision = "f64";
    std::uint64_t train_split_seed = 0, train_seed = 0;
    auto* train = app.add_subcommand("train", "Train one configuration");
    train->add_option("--dataset", train_dataset, "Dataset CSV")->required();
    train->add_option("--label", train_label, "Label column name");
    add_kg_flags(train, train_kg, /*required=*/false);
    train->add_option("--embeddings", train_embeddings, "Pretrained embedding artifact dir");
    train->add_option("--ablation", train_ablation, "Model ablation")
        ->check(CLI::IsMember({"none", "no-mp", "no-kg", "feature-only-kg", "plato-lr"}));
    train->add_option("--mp-graph", train_mp_graph,
                      "Message-passing domain (full-imputed treats non-feature values as 0)")
        ->check(CLI::IsMember({"feature", "full-imputed"}));
    add_trial_flags(train, trial_flags);
    train->add_option("--split-seed", train_split_seed, "Data split seed");
    train->add_option("--seed", train_seed, "Training seed");
    train->add_option("--precision", train_precision, "Numeric mode")
        ->check(CLI::IsMember({"f64", "f32"}));
    train->add_option("--out", train_out, "Output directory")->required();

    // search
    KgFlags search_kg;
    SearchOptions search_opts;
    std::string search_dataset, search_label = "label", search_embeddings, search_out;
    std::string search_model = "plato", search_model_label, search_mp_graph = "feature";
    std::string search_ranges = "paper", search_precision = "f64";
    auto* search = app.add_subcommand("search", "Random hyperparameter search");
    search->add_option("--dataset", search_dataset, "Dataset CSV")->required();
    search->add_option("--label", search_label, "Label column name");
    add_kg_flags(search, search_kg, /*required=*/false);
    search->add_option("--embeddings", search_embeddings, "Pretrained embedding artifact dir");
    search->add_option("--model", search_model, "Model family")
        ->check(CLI::IsMember({"plato", "plato-no-mp", "plato-lr", "mlp", "ridge", "lasso",
                               "graphnet", "nc-lasso", "network-lasso"}));
    search->add_option("--model-label", search_model_label,
                       "Override the model name recorded in the report");
    search->add_option("--mp-graph", search_mp_graph, "Message-passing domain")
        ->check(CLI::IsMember({"feature", "full-imputed"}));
    search->add_option("--trials", search_opts.n_trials, "Sampled configurations");
    search->add_option("--splits", search_opts.n_splits, "Data splits");
    search->add_option("--repeats", search_opts.n_repeats, "Runs per split");
    search->add_option("--seed", search_opts.master_seed, "Master seed");
    search->add_option("--ranges", search_ranges, "Hyperparameter ranges")
        ->check(CLI::IsMember({"paper", "desk"}));
    search->add_option("--precision", search_precision, "Numeric mode")
        ->check(CLI::IsMember({"f64", "f32"}));
    search->add_option("--jobs", search_opts.jobs, "Parallel trials");
    search->add_option("--out", search_out, "Report JSON-lines path")->required();

    // report
    std::vector<std::string> report_inputs;
    std::string report_out, report_csv;
    auto* report = app.add_subcommand("report", "Aggregate search reports into a table");
    report->add_option("inputs", report_inputs, "JSON-lines report files")->required();
    report->add_option("--out", report_out, "Write the table here instead of stdout");
    report->add_option("--csv", report_csv, "Also write a CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help() << "\n";
        return 2;
    }

    try {
        if (gen->parsed()) {
            return cmd_gen_synth(synth_cfg, synth_out, synth_label);
        }
        if (pre->parsed()) {
            return cmd_pretrain(pre_kg, pre_cfg, pre_method, pre_scope, pre_out);
        }
        if (train->parsed()) {
            return cmd_train(train_dataset, train_label, train_kg, train_embeddings,
                             train_ablation, train_mp_graph, trial_flags, train_split_seed,
                             train_seed, train_precision, train_out);
        }
        if (search->parsed()) {
            return cmd_search(search_dataset, search_label, search_kg, search_embeddings,
                              search_model, search_model_label, search_mp_graph, search_opts,
                              search_ranges, search_precision, search_out);
        }
        if (report->parsed()) {
            return cmd_report(report_inputs, report_out, report_csv);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const RuntimeFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
