#include "plato/embed.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "plato/errors.hpp"
#include "plato/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "embedding artifacts assume a little-endian host");

namespace plato {

namespace {

void check_ids(const NodeEmbeddingTable& table, int h, int r, int t) {
    if (h < 0 || h >= table.entities.rows || t < 0 || t >= table.entities.rows) {
        throw ValidationError("entity id out of range");
    }
    if (r < 0 || r >= table.relations.rows) {
        throw ValidationError("relation id out of range");
    }
}

double softplus(double x) {
    // log(1 + exp(x)) without overflow
    if (x > 30.0) {
        return x;
    }
    if (x < -30.0) {
        return std::exp(x);
    }
    return std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

const char* to_string(EmbedMethod m) {
    switch (m) {
        case EmbedMethod::ComplEx: return "complex";
        case EmbedMethod::DistMult: return "distmult";
        case EmbedMethod::TransE: return "transe";
    }
    return "complex";
}

EmbedMethod embed_method_from_string(const std::string& s) {
    if (s == "complex") return EmbedMethod::ComplEx;
    if (s == "distmult") return EmbedMethod::DistMult;
    if (s == "transe") return EmbedMethod::TransE;
    throw ConfigError("unknown embedding method: " + s);
}

double score_triple(const NodeEmbeddingTable& table, int h, int r, int t) {
    check_ids(table, h, r, t);
    const int c = table.c;
    const double* eh = table.entities.row(h);
    const double* wr = table.relations.row(r);
    const double* et = table.entities.row(t);

    switch (table.method) {
        case EmbedMethod::DistMult: {
            double s = 0.0;
            for (int k = 0; k < c; ++k) {
                s += eh[k] * wr[k] * et[k];
            }
            return s;
        }
        case EmbedMethod::TransE: {
            double sq = 0.0;
            for (int k = 0; k < c; ++k) {
                const double diff = eh[k] + wr[k] - et[k];
                sq += diff * diff;
            }
            return -std::sqrt(sq);
        }
        case EmbedMethod::ComplEx: {
            const int half = c / 2;
            double s = 0.0;
            for (int k = 0; k < half; ++k) {
                const double hr = eh[k], hi = eh[half + k];
                const double rr = wr[k], ri = wr[half + k];
                const double tr = et[k], ti = et[half + k];
                // Re[(hr + i hi)(rr + i ri)(tr - i ti)]
                s += rr * (hr * tr + hi * ti) + ri * (hi * tr - hr * ti);
            }
            return s;
        }
    }
    return 0.0;
}

void score_triple_gradients(const NodeEmbeddingTable& table, int h, int r, int t,
                            std::span<double> dh, std::span<double> dr, std::span<double> dt) {
    check_ids(table, h, r, t);
    const int c = table.c;
    const double* eh = table.entities.row(h);
    const double* wr = table.relations.row(r);
    const double* et = table.entities.row(t);

    switch (table.method) {
        case EmbedMethod::DistMult: {
            for (int k = 0; k < c; ++k) {
                dh[k] = wr[k] * et[k];
                dr[k] = eh[k] * et[k];
                dt[k] = eh[k] * wr[k];
            }
            break;
        }
        case EmbedMethod::TransE: {
            double sq = 0.0;
            for (int k = 0; k < c; ++k) {
                const double diff = eh[k] + wr[k] - et[k];
                sq += diff * diff;
            }
            const double norm = std::sqrt(sq);
            if (norm < 1e-12) {
                for (int k = 0; k < c; ++k) {
                    dh[k] = dr[k] = dt[k] = 0.0;
                }
                break;
            }
            for (int k = 0; k < c; ++k) {
                const double g = -(eh[k] + wr[k] - et[k]) / norm;
                dh[k] = g;
                dr[k] = g;
                dt[k] = -g;
            }
            break;
        }
        case EmbedMethod::ComplEx: {
            const int half = c / 2;
            for (int k = 0; k < half; ++k) {
                const double hr = eh[k], hi = eh[half + k];
                const double rr = wr[k], ri = wr[half + k];
                const double tr = et[k], ti = et[half + k];
                dh[k] = rr * tr - ri * ti;
                dh[half + k] = rr * ti + ri * tr;
                dr[k] = hr * tr + hi * ti;
                dr[half + k] = hi * tr - hr * ti;
                dt[k] = rr * hr + ri * hi;
                dt[half + k] = rr * hi - ri * hr;
            }
            break;
        }
    }
}

PretrainResult pretrain(const KnowledgeGraph& kg, const PretrainConfig& cfg) {
    if (kg.edges().empty()) {
        throw ValidationError("pretrain requires a graph with at least one edge");
    }
    if (cfg.c < 2) {
        throw ConfigError("embedding dimension must be >= 2");
    }
    if (cfg.method == EmbedMethod::ComplEx && cfg.c % 2 != 0) {
        throw ConfigError("ComplEx requires an even embedding dimension");
    }
    if (cfg.negatives_per_positive < 1) {
        throw ConfigError("negatives_per_positive must be >= 1");
    }

    NodeEmbeddingTable table;
    table.method = cfg.method;
    table.c = cfg.c;
    table.entities.resize(kg.node_count(), cfg.c);
    table.relations.resize(kg.relation_count(), cfg.c);

    Rng init_rng(derive_seed(cfg.seed, {0x696e6974u /* "init" */}));
    const double limit = 0.5 / std::sqrt(static_cast<double>(cfg.c));
    for (auto& v : table.entities.data) {
        v = init_rng.uniform(-limit, limit);
    }
    for (auto& v : table.relations.data) {
        v = init_rng.uniform(-limit, limit);
    }

    const auto& edges = kg.edges();
    const int n_edges = static_cast<int>(edges.size());
    const int n_nodes = kg.node_count();
    const int c = cfg.c;

    std::vector<int> order(n_edges);
    for (int i = 0; i < n_edges; ++i) {
        order[i] = i;
    }

    // Sparse per-batch gradient accumulators.
    Tensor2<double> ent_grad(n_nodes, c);
    Tensor2<double> rel_grad(kg.relation_count(), c);
    std::vector<int> touched_entities, touched_relations;
    std::vector<char> ent_touched(n_nodes, 0), rel_touched(kg.relation_count(), 0);
    std::vector<double> dh(c), dr(c), dt(c);

    auto touch_entity = [&](int id) {
        if (!ent_touched[id]) {
            ent_touched[id] = 1;
            touched_entities.push_back(id);
        }
    };
    auto touch_relation = [&](int id) {
        if (!rel_touched[id]) {
            rel_touched[id] = 1;
            touched_relations.push_back(id);
        }
    };

    // dL/dscore for one triple with the given label under logistic loss.
    auto accumulate = [&](int h, int r, int t, double dscore) {
        score_triple_gradients(table, h, r, t, dh, dr, dt);
        touch_entity(h);
        touch_entity(t);
        touch_relation(r);
        double* gh = ent_grad.row(h);
        double* gt = ent_grad.row(t);
        double* gr = rel_grad.row(r);
        for (int k = 0; k < c; ++k) {
            gh[k] += dscore * dh[k];
            gr[k] += dscore * dr[k];
            gt[k] += dscore * dt[k];
        }
    };

    PretrainResult result;
    result.epoch_loss.reserve(cfg.epochs);
    Rng rng(derive_seed(cfg.seed, {0x74726169u /* "trai" */}));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        int batch_index = 0;
        for (int start = 0; start < n_edges; start += cfg.batch_size, ++batch_index) {
            const int end = std::min(start + cfg.batch_size, n_edges);
            touched_entities.clear();
            touched_relations.clear();
            double batch_loss = 0.0;
            for (int i = start; i < end; ++i) {
                const Triple& pos = edges[order[i]];
                const double s_pos = score_triple(table, pos.head, pos.relation, pos.tail);
                batch_loss += softplus(-s_pos);
                accumulate(pos.head, pos.relation, pos.tail, -sigmoid(-s_pos));
                for (int neg = 0; neg < cfg.negatives_per_positive; ++neg) {
                    // Uniform unfiltered corruption of head or tail.
                    Triple cor = pos;
                    const int replacement = static_cast<int>(rng.uniform_int(0, n_nodes - 1));
                    if (rng.bernoulli(0.5)) {
                        cor.head = replacement;
                    } else {
                        cor.tail = replacement;
                    }
                    const double s_neg = score_triple(table, cor.head, cor.relation, cor.tail);
                    batch_loss += softplus(s_neg);
                    accumulate(cor.head, cor.relation, cor.tail, sigmoid(s_neg));
                }
            }
            if (!std::isfinite(batch_loss)) {
                throw DivergenceError("pretrain diverged at epoch " + std::to_string(epoch) +
                                      " batch " + std::to_string(batch_index));
            }
            epoch_loss += batch_loss;

            const double scale = cfg.learning_rate / static_cast<double>(end - start);
            for (int id : touched_entities) {
                double* row = table.entities.row(id);
                double* g = ent_grad.row(id);
                for (int k = 0; k < c; ++k) {
                    double step = g[k];
                    if (cfg.l2 > 0.0) {
                        step += 2.0 * cfg.l2 * row[k];
                    }
                    row[k] -= scale * step;
                    g[k] = 0.0;
                }
                ent_touched[id] = 0;
            }
            for (int id : touched_relations) {
                double* row = table.relations.row(id);
                double* g = rel_grad.row(id);
                for (int k = 0; k < c; ++k) {
                    double step = g[k];
                    if (cfg.l2 > 0.0) {
                        step += 2.0 * cfg.l2 * row[k];
                    }
                    row[k] -= scale * step;
                    g[k] = 0.0;
                }
                rel_touched[id] = 0;
            }
        }
        result.epoch_loss.push_back(epoch_loss / static_cast<double>(n_edges));
    }

    result.table = std::move(table);
    return result;
}

FeatureEmbeddings extract_feature_embeddings(const NodeEmbeddingTable& table,
                                             const FeatureMapping& fm) {
    FeatureEmbeddings m;
    m.d = fm.feature_count();
    m.c = table.c;
    m.values.resize(m.d, m.c);
    for (int j = 0; j < m.d; ++j) {
        const int node = fm.node_of_feature[j];
        if (node < 0 || node >= table.entities.rows) {
            throw ValidationError("feature mapping references node out of embedding range");
        }
        const double* src = table.entities.row(node);
        double* dst = m.values.row(j);
        std::copy(src, src + m.c, dst);
    }
    return m;
}

namespace {

void write_f32_matrix(const std::string& path, const Tensor2<double>& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw RuntimeFailure("cannot write " + path);
    }
    std::vector<float> buf(m.data.size());
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        buf[i] = static_cast<float>(m.data[i]);
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

Tensor2<double> read_f32_matrix(const std::string& path, int rows, int cols) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) {
        throw ValidationError("cannot open " + path);
    }
    const auto bytes = static_cast<std::size_t>(in.tellg());
    const auto expected = static_cast<std::size_t>(rows) * cols * sizeof(float);
    if (bytes != expected) {
        throw ValidationError(path + ": size " + std::to_string(bytes) +
                              " does not match manifest (" + std::to_string(expected) + ")");
    }
    in.seekg(0);
    std::vector<float> buf(static_cast<std::size_t>(rows) * cols);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
    Tensor2<double> m(rows, cols);
    for (std::size_t i = 0; i < buf.size(); ++i) {
        m.data[i] = static_cast<double>(buf[i]);
    }
    return m;
}

}  // namespace

void save_embedding_artifact(const NodeEmbeddingTable& table, const std::string& dir,
                             std::uint64_t seed, const std::string& graph_scope) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["method"] = to_string(table.method);
    manifest["c"] = table.c;
    manifest["node_count"] = table.entities.rows;
    manifest["relation_count"] = table.relations.rows;
    manifest["seed"] = seed;
    manifest["graph_scope"] = graph_scope;
    std::ofstream out(dir + "/manifest.json");
    if (!out) {
        throw RuntimeFailure("cannot write " + dir + "/manifest.json");
    }
    out << manifest.dump(2) << "\n";
    write_f32_matrix(dir + "/entities.bin", table.entities);
    write_f32_matrix(dir + "/relations.bin", table.relations);
}

EmbeddingArtifactInfo read_embedding_info(const std::string& dir) {
    std::ifstream in(dir + "/manifest.json");
    if (!in) {
        throw ValidationError("cannot open " + dir + "/manifest.json");
    }
    const nlohmann::json manifest = nlohmann::json::parse(in);
    EmbeddingArtifactInfo info;
    info.method = embed_method_from_string(manifest.at("method").get<std::string>());
    info.c = manifest.at("c").get<int>();
    info.node_count = manifest.at("node_count").get<int>();
    info.relation_count = manifest.at("relation_count").get<int>();
    info.seed = manifest.at("seed").get<std::uint64_t>();
    info.graph_scope = manifest.value("graph_scope", "full");
    return info;
}

NodeEmbeddingTable load_embedding_artifact(const std::string& dir) {
    std::ifstream in(dir + "/manifest.json");
    if (!in) {
        throw ValidationError("cannot open " + dir + "/manifest.json");
    }
    nlohmann::json manifest = nlohmann::json::parse(in);
    NodeEmbeddingTable table;
    table.method = embed_method_from_string(manifest.at("method").get<std::string>());
    table.c = manifest.at("c").get<int>();
    const int nodes = manifest.at("node_count").get<int>();
    const int relations = manifest.at("relation_count").get<int>();
    table.entities = read_f32_matrix(dir + "/entities.bin", nodes, table.c);
    table.relations = read_f32_matrix(dir + "/relations.bin", relations, table.c);
    for (double v : table.entities.data) {
        if (!std::isfinite(v)) {
            throw ValidationError(dir + ": non-finite entity embedding");
        }
    }
    for (double v : table.relations.data) {
        if (!std::isfinite(v)) {
            throw ValidationError(dir + ": non-finite relation embedding");
        }
    }
    return table;
}

}  // namespace plato
