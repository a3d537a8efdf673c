#include "plato/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "plato/errors.hpp"
#include "plato/rng.hpp"

namespace plato {

namespace {

constexpr double kLatentJitter = 0.3;   // within-community latent scatter
constexpr double kPreactStd = 2.0;      // target std of x . theta columns

std::string feature_name(int j) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "F%05d", j);
    return buf;
}

std::string hub_name(int community, int slot) {
    return "domain_c" + std::to_string(community) + "_h" + std::to_string(slot);
}

}  // namespace

SyntheticData generate(const SynthConfig& cfg) {
    if (cfg.d <= 0 || cfg.n < 2) {
        throw ConfigError("synth: need d >= 1 and n >= 2");
    }
    if (cfg.n_communities <= 0 || cfg.n_communities > cfg.d) {
        throw ConfigError("synth: n_communities must be in [1, d]");
    }
    if (cfg.p_intra < 0.0 || cfg.p_intra > 1.0 || cfg.p_inter < 0.0 || cfg.p_inter > 1.0) {
        throw ConfigError("synth: edge probabilities must be in [0, 1]");
    }
    if (cfg.p_intra < cfg.p_inter) {
        throw ConfigError("synth: p_intra must be >= p_inter");
    }
    if (cfg.c_latent <= 0 || cfg.h_true <= 0 || cfg.n_broader < 0 || cfg.noise_std < 0.0) {
        throw ConfigError("synth: invalid latent/noise configuration");
    }

    SyntheticData out;
    const int d = cfg.d, n = cfg.n, k = cfg.n_communities;
    Rng rng(derive_seed(cfg.seed, {0x73796e74u /* "synt" */}));

    // Contiguous community blocks.
    out.truth.community.resize(d);
    for (int j = 0; j < d; ++j) {
        out.truth.community[j] = static_cast<int>((static_cast<long>(j) * k) / d);
    }

    // Community means and per-feature latents.
    Tensor2<double> mu(k, cfg.c_latent);
    for (auto& v : mu.data) {
        v = rng.normal();
    }
    out.truth.z.resize(d, cfg.c_latent);
    for (int j = 0; j < d; ++j) {
        const double* m = mu.row(out.truth.community[j]);
        double* zj = out.truth.z.row(j);
        for (int t = 0; t < cfg.c_latent; ++t) {
            zj[t] = m[t] + kLatentJitter * rng.normal();
        }
    }

    // Feature-feature edges with one of three relation types.
    const std::vector<std::string> relations{"interacts_a", "interacts_b", "interacts_c"};
    for (int j = 0; j < d; ++j) {
        for (int t = j + 1; t < d; ++t) {
            const double p =
                out.truth.community[j] == out.truth.community[t] ? cfg.p_intra : cfg.p_inter;
            if (rng.uniform01() < p) {
                out.triples.push_back({feature_name(j), rng.choice(relations), feature_name(t)});
                ++out.feature_edge_count;
            }
        }
    }

    // Broader-domain hubs: each linked to every feature of one community via
    // its own relation, making community identity recoverable by pretraining
    // even when feature-feature edges are sparse.
    for (int b = 0; b < cfg.n_broader; ++b) {
        const int community = b % k;
        const int slot = b / k;
        const std::string hub = hub_name(community, slot);
        const std::string relation = "member_of_h" + std::to_string(b);
        for (int j = 0; j < d; ++j) {
            if (out.truth.community[j] == community) {
                out.triples.push_back({feature_name(j), relation, hub});
                ++out.hub_edge_count;
            }
        }
    }
    if (out.triples.empty()) {
        throw ConfigError("synth: configuration produced an empty graph");
    }

    for (int j = 0; j < d; ++j) {
        out.feature_map.emplace_back(feature_name(j), feature_name(j));
    }

    // True weights theta*_j = W z_j, rescaled so pre-activations have a std
    // that puts tanh into its curved range.
    Tensor2<double> w_map(cfg.h_true, cfg.c_latent);
    for (auto& v : w_map.data) {
        v = rng.normal(0.0, 1.0 / std::sqrt(static_cast<double>(cfg.c_latent)));
    }
    out.truth.theta.resize(d, cfg.h_true);
    for (int j = 0; j < d; ++j) {
        const double* zj = out.truth.z.row(j);
        double* tj = out.truth.theta.row(j);
        for (int o = 0; o < cfg.h_true; ++o) {
            double acc = 0.0;
            const double* wr = w_map.row(o);
            for (int t = 0; t < cfg.c_latent; ++t) {
                acc += wr[t] * zj[t];
            }
            tj[o] = acc;
        }
    }
    for (int o = 0; o < cfg.h_true; ++o) {
        double norm = 0.0;
        for (int j = 0; j < d; ++j) {
            norm += out.truth.theta(j, o) * out.truth.theta(j, o);
        }
        norm = std::sqrt(norm);
        const double scale = norm > 0.0 ? kPreactStd / norm : 1.0;
        for (int j = 0; j < d; ++j) {
            out.truth.theta(j, o) *= scale;
        }
    }

    out.truth.v.resize(cfg.h_true);
    for (auto& v : out.truth.v) {
        v = rng.normal();
    }

    // Samples and labels: y = tanh(X theta*) v* + eps, with the clean signal
    // normalized to unit std so noise_std is an absolute noise level.
    auto& ds = out.dataset;
    ds.x.resize(n, d);
    for (auto& v : ds.x.data) {
        v = rng.normal();
    }
    std::vector<double> clean(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double* xi = ds.x.row(i);
        double acc = 0.0;
        for (int o = 0; o < cfg.h_true; ++o) {
            double pre = 0.0;
            for (int j = 0; j < d; ++j) {
                pre += xi[j] * out.truth.theta(j, o);
            }
            acc += std::tanh(pre) * out.truth.v[o];
        }
        clean[i] = acc;
    }
    double mean = 0.0;
    for (double v : clean) {
        mean += v;
    }
    mean /= n;
    double var = 0.0;
    for (double v : clean) {
        var += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(var / n);
    const double y_scale = sd > 0.0 ? 1.0 / sd : 1.0;
    for (int o = 0; o < cfg.h_true; ++o) {
        out.truth.v[o] *= y_scale;
    }

    ds.y.resize(n);
    for (int i = 0; i < n; ++i) {
        ds.y[i] = clean[i] * y_scale + cfg.noise_std * rng.normal();
    }
    ds.feature_names.reserve(d);
    for (int j = 0; j < d; ++j) {
        ds.feature_names.push_back(feature_name(j));
    }
    ds.sample_ids.reserve(n);
    for (int i = 0; i < n; ++i) {
        ds.sample_ids.push_back("S" + std::to_string(i));
    }
    return out;
}

void write_synthetic(const SyntheticData& data, const std::string& dir,
                     const std::string& label_column) {
    std::filesystem::create_directories(dir);

    std::ofstream triples(dir + "/triples.tsv");
    if (!triples) {
        throw RuntimeFailure("cannot write " + dir + "/triples.tsv");
    }
    for (const auto& t : data.triples) {
        triples << t[0] << '\t' << t[1] << '\t' << t[2] << '\n';
    }

    std::ofstream fmap(dir + "/feature_map.tsv");
    if (!fmap) {
        throw RuntimeFailure("cannot write " + dir + "/feature_map.tsv");
    }
    for (const auto& [feature, node] : data.feature_map) {
        fmap << feature << '\t' << node << '\n';
    }

    save_dataset_csv(data.dataset, dir + "/dataset.csv", label_column);

    nlohmann::json truth;
    truth["v"] = data.truth.v;
    truth["community"] = data.truth.community;
    auto matrix_json = [](const Tensor2<double>& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (int i = 0; i < m.rows; ++i) {
            rows.push_back(std::vector<double>(m.row(i), m.row(i) + m.cols));
        }
        return rows;
    };
    truth["z"] = matrix_json(data.truth.z);
    truth["theta"] = matrix_json(data.truth.theta);
    std::ofstream gt(dir + "/ground_truth.json");
    if (!gt) {
        throw RuntimeFailure("cannot write " + dir + "/ground_truth.json");
    }
    gt << truth.dump() << "\n";
}

SynthSummary describe(const SyntheticData& data) {
    SynthSummary s;
    s.feature_edges = data.feature_edge_count;
    s.hub_edges = data.hub_edge_count;
    s.d_over_n = static_cast<double>(data.dataset.d()) / data.dataset.n();

    const auto& theta = data.truth.theta;
    const int d = theta.rows;
    std::vector<double> norm(d, 0.0);
    for (int j = 0; j < d; ++j) {
        double acc = 0.0;
        for (int o = 0; o < theta.cols; ++o) {
            acc += theta(j, o) * theta(j, o);
        }
        norm[j] = std::sqrt(acc);
    }
    double within = 0.0, between = 0.0;
    long n_within = 0, n_between = 0;
    for (int j = 0; j < d; ++j) {
        for (int t = j + 1; t < d; ++t) {
            if (norm[j] == 0.0 || norm[t] == 0.0) {
                continue;
            }
            double dot = 0.0;
            for (int o = 0; o < theta.cols; ++o) {
                dot += theta(j, o) * theta(t, o);
            }
            const double cosine = dot / (norm[j] * norm[t]);
            if (data.truth.community[j] == data.truth.community[t]) {
                within += cosine;
                ++n_within;
            } else {
                between += cosine;
                ++n_between;
            }
        }
    }
    s.within_cosine = n_within > 0 ? within / n_within : 0.0;
    s.between_cosine = n_between > 0 ? between / n_between : 0.0;
    return s;
}

}  // namespace plato
