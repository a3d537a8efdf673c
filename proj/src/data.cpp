#include "plato/data.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "plato/errors.hpp"
#include "plato/rng.hpp"

namespace plato {

namespace {

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

double parse_double(const std::string& s, const std::string& context) {
    double value = 0.0;
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError(context + ": cannot parse number '" + s + "'");
    }
    if (!std::isfinite(value)) {
        throw ValidationError(context + ": non-finite value '" + s + "'");
    }
    return value;
}

}  // namespace

TabularDataset load_dataset_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open dataset: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(path + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const auto header = split_commas(line);
    if (header.size() < 3) {
        throw ParseError(path + ": header needs an id column, a label column, and features");
    }
    int label_idx = -1;
    for (std::size_t i = 1; i < header.size(); ++i) {
        if (header[i] == label_column) {
            label_idx = static_cast<int>(i);
            break;
        }
    }
    if (label_idx < 0) {
        throw ValidationError(path + ": label column '" + label_column + "' not found");
    }

    TabularDataset ds;
    for (std::size_t i = 1; i < header.size(); ++i) {
        if (static_cast<int>(i) != label_idx) {
            ds.feature_names.push_back(header[i]);
        }
    }

    std::vector<double> values;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split_commas(line);
        if (fields.size() != header.size()) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        ds.sample_ids.push_back(fields[0]);
        const std::string context = path + ":" + std::to_string(line_no);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            const double v = parse_double(fields[i], context);
            if (static_cast<int>(i) == label_idx) {
                ds.y.push_back(v);
            } else {
                values.push_back(v);
            }
        }
    }
    const int n = static_cast<int>(ds.sample_ids.size());
    const int d = static_cast<int>(ds.feature_names.size());
    if (n == 0) {
        throw ValidationError(path + ": no data rows");
    }
    ds.x.resize(n, d);
    ds.x.data = std::move(values);
    return ds;
}

void save_dataset_csv(const TabularDataset& ds, const std::string& path,
                      const std::string& label_column) {
    std::ofstream out(path);
    if (!out) {
        throw RuntimeFailure("cannot write dataset: " + path);
    }
    out << "sample_id," << label_column;
    for (const auto& name : ds.feature_names) {
        out << ',' << name;
    }
    out << '\n';
    char buf[64];
    auto write_num = [&](double v) {
        const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
        out.write(buf, len);
    };
    for (int i = 0; i < ds.n(); ++i) {
        out << ds.sample_ids[i] << ',';
        write_num(ds.y[i]);
        const double* row = ds.x.row(i);
        for (int j = 0; j < ds.d(); ++j) {
            out << ',';
            write_num(row[j]);
        }
        out << '\n';
    }
}

TabularDataset align_to_mapping(const TabularDataset& ds, const FeatureMapping& fm) {
    std::map<std::string, int> column_of;
    for (int j = 0; j < ds.d(); ++j) {
        if (!column_of.emplace(ds.feature_names[j], j).second) {
            throw ValidationError("duplicate feature column '" + ds.feature_names[j] + "'");
        }
    }
    std::vector<int> order(fm.feature_count());
    for (int j = 0; j < fm.feature_count(); ++j) {
        auto it = column_of.find(fm.feature_names[j]);
        if (it == column_of.end()) {
            throw ValidationError("dataset is missing mapped feature '" + fm.feature_names[j] +
                                  "'");
        }
        order[j] = it->second;
    }
    if (ds.d() != fm.feature_count()) {
        throw ValidationError("dataset has feature columns absent from the feature map");
    }

    TabularDataset out;
    out.y = ds.y;
    out.sample_ids = ds.sample_ids;
    out.feature_names = fm.feature_names;
    out.x.resize(ds.n(), fm.feature_count());
    for (int i = 0; i < ds.n(); ++i) {
        const double* src = ds.x.row(i);
        double* dst = out.x.row(i);
        for (int j = 0; j < fm.feature_count(); ++j) {
            dst[j] = src[order[j]];
        }
    }
    return out;
}

SplitSpec split_dataset(int n, std::uint64_t split_seed) {
    if (n < 5) {
        throw ValidationError("need at least 5 samples to split, got " + std::to_string(n));
    }
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) {
        perm[i] = i;
    }
    Rng rng(derive_seed(split_seed, {0x73706c69u /* "spli" */}));
    rng.shuffle(perm);

    const int n_train = (n * 6) / 10;
    const int n_val = (n * 2) / 10;
    SplitSpec spec;
    spec.split_seed = split_seed;
    spec.train.assign(perm.begin(), perm.begin() + n_train);
    spec.val.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
    spec.test.assign(perm.begin() + n_train + n_val, perm.end());
    return spec;
}

double pearson_r(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size() || y_true.size() < 2) {
        throw ValidationError("pearson_r needs two equal-length vectors of size >= 2");
    }
    const auto n = static_cast<double>(y_true.size());
    double mean_t = 0.0, mean_p = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        mean_t += y_true[i];
        mean_p += y_pred[i];
    }
    mean_t /= n;
    mean_p /= n;
    double cov = 0.0, var_t = 0.0, var_p = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double dt = y_true[i] - mean_t;
        const double dp = y_pred[i] - mean_p;
        cov += dt * dp;
        var_t += dt * dt;
        var_p += dp * dp;
    }
    if (var_t == 0.0) {
        throw ValidationError("pearson_r: y_true is constant");
    }
    if (var_p == 0.0) {
        return 0.0;  // constant predictions carry no ranking information
    }
    return cov / std::sqrt(var_t * var_p);
}

Standardizer Standardizer::fit(const TabularDataset& ds, const std::vector<int>& train_indices) {
    if (train_indices.empty()) {
        throw ValidationError("cannot fit standardizer on an empty training split");
    }
    const int d = ds.d();
    const auto n = static_cast<double>(train_indices.size());
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 1.0);
    for (int i : train_indices) {
        const double* row = ds.x.row(i);
        for (int j = 0; j < d; ++j) {
            s.mean[j] += row[j];
        }
        s.y_mean += ds.y[i];
    }
    for (int j = 0; j < d; ++j) {
        s.mean[j] /= n;
    }
    s.y_mean /= n;
    std::vector<double> var(d, 0.0);
    double y_var = 0.0;
    for (int i : train_indices) {
        const double* row = ds.x.row(i);
        for (int j = 0; j < d; ++j) {
            const double diff = row[j] - s.mean[j];
            var[j] += diff * diff;
        }
        const double dy = ds.y[i] - s.y_mean;
        y_var += dy * dy;
    }
    for (int j = 0; j < d; ++j) {
        const double sd = std::sqrt(var[j] / n);
        s.scale[j] = sd > 0.0 ? sd : 1.0;  // constant features keep unit scale
    }
    const double y_sd = std::sqrt(y_var / n);
    s.y_scale = y_sd > 0.0 ? y_sd : 1.0;
    return s;
}

Tensor2<double> Standardizer::transform_x(const Tensor2<double>& x) const {
    Tensor2<double> out(x.rows, x.cols);
    for (int i = 0; i < x.rows; ++i) {
        const double* src = x.row(i);
        double* dst = out.row(i);
        for (int j = 0; j < x.cols; ++j) {
            dst[j] = (src[j] - mean[j]) / scale[j];
        }
    }
    return out;
}

std::vector<double> Standardizer::transform_y(std::span<const double> y) const {
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        out[i] = (y[i] - y_mean) / y_scale;
    }
    return out;
}

}  // namespace plato
