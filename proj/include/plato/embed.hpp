#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plato/kg.hpp"
#include "plato/tensor.hpp"

namespace plato {

enum class EmbedMethod { ComplEx, DistMult, TransE };

const char* to_string(EmbedMethod m);
EmbedMethod embed_method_from_string(const std::string& s);

// Pretrained node/relation embeddings. For ComplEx, c is even and a row holds
// c/2 real parts followed by c/2 imaginary parts.
struct NodeEmbeddingTable {
    EmbedMethod method = EmbedMethod::ComplEx;
    int c = 0;
    Tensor2<double> entities;   // |V| x c
    Tensor2<double> relations;  // |R| x c
};

struct PretrainConfig {
    int c = 200;
    int negatives_per_positive = 5;
    int epochs = 200;
    double learning_rate = 0.05;
    int batch_size = 128;
    double l2 = 0.0;  // optional embedding regularization, off by default
    std::uint64_t seed = 0;
    EmbedMethod method = EmbedMethod::ComplEx;
};

// Plausibility score of (h, r, t); higher means more plausible.
//   ComplEx:  Re<e_h, w_r, conj(e_t)>
//   DistMult: <e_h, w_r, e_t>
//   TransE:  -||e_h + w_r - e_t||_2
double score_triple(const NodeEmbeddingTable& table, int h, int r, int t);

// d(score)/d(e_h), d(w_r), d(e_t), each of length c. Used by the trainer and
// checked against finite differences in tests.
void score_triple_gradients(const NodeEmbeddingTable& table, int h, int r, int t,
                            std::span<double> dh, std::span<double> dr, std::span<double> dt);

struct PretrainResult {
    NodeEmbeddingTable table;
    std::vector<double> epoch_loss;  // mean per-positive loss per epoch
};

// Self-supervised pretraining: binary logistic loss on observed triplets
// (label 1) vs uniformly corrupted ones (head or tail replaced, label 0),
// minimized by minibatch SGD. Deterministic under cfg.seed.
PretrainResult pretrain(const KnowledgeGraph& kg, const PretrainConfig& cfg);

// The frozen feature-embedding matrix M (d x c): row j is the entity
// embedding of feature j's node. Downstream training must not mutate it.
struct FeatureEmbeddings {
    int d = 0;
    int c = 0;
    Tensor2<double> values;
};

FeatureEmbeddings extract_feature_embeddings(const NodeEmbeddingTable& table,
                                             const FeatureMapping& fm);

// On-disk artifact: manifest.json plus entities.bin / relations.bin holding
// little-endian IEEE-754 float32 values in row-major order. graph_scope
// records whether pretraining saw the full KG or the feature-only subgraph.
void save_embedding_artifact(const NodeEmbeddingTable& table, const std::string& dir,
                             std::uint64_t seed, const std::string& graph_scope = "full");
NodeEmbeddingTable load_embedding_artifact(const std::string& dir);

struct EmbeddingArtifactInfo {
    EmbedMethod method = EmbedMethod::ComplEx;
    int c = 0;
    int node_count = 0;
    int relation_count = 0;
    std::uint64_t seed = 0;
    std::string graph_scope = "full";
};
EmbeddingArtifactInfo read_embedding_info(const std::string& dir);

}  // namespace plato
