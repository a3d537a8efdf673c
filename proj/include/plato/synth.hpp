#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "plato/data.hpp"
#include "plato/tensor.hpp"

namespace plato {

// Synthetic (dataset, KG, ground truth) generator: features whose true
// first-layer weight vectors vary smoothly over an auxiliary graph, at a
// scale where every ablation runs on a desk.
struct SynthConfig {
    int d = 2000;
    int n = 100;
    int c_latent = 8;
    int h_true = 4;
    int n_communities = 20;
    double p_intra = 0.08;   // same-community feature edge probability
    double p_inter = 0.0005; // cross-community feature edge probability
    int n_broader = 40;      // community-hub domain nodes (non-features)
    double noise_std = 0.1;
    std::uint64_t seed = 0;
};

struct GroundTruth {
    Tensor2<double> z;      // d x c_latent feature latents
    Tensor2<double> theta;  // d x h_true true first-layer weights
    std::vector<double> v;  // h_true readout
    std::vector<int> community;
};

struct SyntheticData {
    TabularDataset dataset;
    std::vector<std::array<std::string, 3>> triples;
    std::vector<std::pair<std::string, std::string>> feature_map;
    GroundTruth truth;
    int feature_edge_count = 0;
    int hub_edge_count = 0;
};

// Deterministic under cfg.seed: same seed, same bytes on disk.
SyntheticData generate(const SynthConfig& cfg);

// Writes triples.tsv, feature_map.tsv, dataset.csv, ground_truth.json.
void write_synthetic(const SyntheticData& data, const std::string& dir,
                     const std::string& label_column = "label");

struct SynthSummary {
    double within_cosine = 0.0;   // mean cosine of true weight vectors, same community
    double between_cosine = 0.0;  // mean cosine across communities
    int feature_edges = 0;
    int hub_edges = 0;
    double d_over_n = 0.0;
};

SynthSummary describe(const SyntheticData& data);

}  // namespace plato
