#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plato/kg.hpp"
#include "plato/tensor.hpp"

namespace plato {

struct TabularDataset {
    Tensor2<double> x;  // n x d
    std::vector<double> y;
    std::vector<std::string> feature_names;
    std::vector<std::string> sample_ids;

    int n() const { return x.rows; }
    int d() const { return x.cols; }
};

// CSV with a header; first column is the sample id, `label_column` holds y,
// every other column is a feature. Rejects non-finite and missing values.
TabularDataset load_dataset_csv(const std::string& path, const std::string& label_column);

void save_dataset_csv(const TabularDataset& ds, const std::string& path,
                      const std::string& label_column);

// Reorders columns to match the feature-map order; every mapped feature must
// be present and no extra feature columns are allowed.
TabularDataset align_to_mapping(const TabularDataset& ds, const FeatureMapping& fm);

struct SplitSpec {
    std::vector<int> train;
    std::vector<int> val;
    std::vector<int> test;
    std::uint64_t split_seed = 0;
};

// Random permutation under the seed: first 60% train, next 20% val, rest test.
SplitSpec split_dataset(int n, std::uint64_t split_seed);

// Sample Pearson correlation. Constant y_pred returns 0 by convention;
// constant y_true is an error.
double pearson_r(std::span<const double> y_true, std::span<const double> y_pred);

// Per-feature z-score statistics fit on the training split; constant features
// get unit scale.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;
    double y_mean = 0.0;
    double y_scale = 1.0;

    static Standardizer fit(const TabularDataset& ds, const std::vector<int>& train_indices);
    Tensor2<double> transform_x(const Tensor2<double>& x) const;
    std::vector<double> transform_y(std::span<const double> y) const;
};

}  // namespace plato
