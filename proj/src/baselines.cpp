#include "plato/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "plato/errors.hpp"

namespace plato {

const char* to_string(PenaltyKind p) {
    switch (p) {
        case PenaltyKind::Ridge: return "ridge";
        case PenaltyKind::Lasso: return "lasso";
        case PenaltyKind::GraphNet: return "graphnet";
        case PenaltyKind::NcLasso: return "nc-lasso";
        case PenaltyKind::NetworkLasso: return "network-lasso";
    }
    return "ridge";
}

PenaltyKind penalty_from_string(const std::string& s) {
    if (s == "ridge") return PenaltyKind::Ridge;
    if (s == "lasso") return PenaltyKind::Lasso;
    if (s == "graphnet") return PenaltyKind::GraphNet;
    if (s == "nc-lasso") return PenaltyKind::NcLasso;
    if (s == "network-lasso") return PenaltyKind::NetworkLasso;
    throw ConfigError("unknown penalty: " + s);
}

double LinearModel::predict_one(std::span<const double> x) const {
    double acc = intercept;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        acc += weights[j] * x[j];
    }
    return acc;
}

std::vector<double> LinearModel::predict(const Tensor2<double>& x) const {
    std::vector<double> out(x.rows);
    for (int i = 0; i < x.rows; ++i) {
        out[i] = predict_one({x.row(i), static_cast<std::size_t>(x.cols)});
    }
    return out;
}

namespace {

struct Centered {
    Tensor2<double> x;             // centered (and optionally scaled) copy
    std::vector<double> y;         // centered targets
    std::vector<double> x_mean;
    std::vector<double> x_scale;   // 1.0 when only centering
    double y_mean = 0.0;
};

Centered center_data(const Tensor2<double>& x, std::span<const double> y, bool scale) {
    Centered c;
    const int n = x.rows, d = x.cols;
    if (n == 0 || static_cast<int>(y.size()) != n) {
        throw ValidationError("fit: X and y sizes do not match");
    }
    c.x_mean.assign(d, 0.0);
    c.x_scale.assign(d, 1.0);
    for (int i = 0; i < n; ++i) {
        const double* row = x.row(i);
        for (int j = 0; j < d; ++j) {
            c.x_mean[j] += row[j];
        }
        c.y_mean += y[i];
    }
    for (int j = 0; j < d; ++j) {
        c.x_mean[j] /= n;
    }
    c.y_mean /= n;
    if (scale) {
        std::vector<double> var(d, 0.0);
        for (int i = 0; i < n; ++i) {
            const double* row = x.row(i);
            for (int j = 0; j < d; ++j) {
                const double diff = row[j] - c.x_mean[j];
                var[j] += diff * diff;
            }
        }
        for (int j = 0; j < d; ++j) {
            const double sd = std::sqrt(var[j] / n);
            c.x_scale[j] = sd > 0.0 ? sd : 1.0;
        }
    }
    c.x.resize(n, d);
    for (int i = 0; i < n; ++i) {
        const double* src = x.row(i);
        double* dst = c.x.row(i);
        for (int j = 0; j < d; ++j) {
            dst[j] = (src[j] - c.x_mean[j]) / c.x_scale[j];
        }
    }
    c.y.resize(n);
    for (int i = 0; i < n; ++i) {
        c.y[i] = y[i] - c.y_mean;
    }
    return c;
}

// Solution in the centered/scaled frame mapped back to original units.
LinearModel finalize(const Centered& c, std::vector<double> w_frame, PenaltyKind penalty) {
    LinearModel model;
    model.penalty = penalty;
    const auto d = w_frame.size();
    model.weights.resize(d);
    double dot = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        model.weights[j] = w_frame[j] / c.x_scale[j];
        dot += model.weights[j] * c.x_mean[j];
    }
    model.intercept = c.y_mean - dot;
    for (double w : model.weights) {
        if (!std::isfinite(w)) {
            throw ConvergenceError("fit produced non-finite weights");
        }
    }
    return model;
}

// Cholesky solve of A w = b for symmetric positive definite A (row-major d x d).
std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> b, int d) {
    for (int j = 0; j < d; ++j) {
        double diag = a[static_cast<std::size_t>(j) * d + j];
        for (int k = 0; k < j; ++k) {
            const double l = a[static_cast<std::size_t>(j) * d + k];
            diag -= l * l;
        }
        if (!(diag > 1e-12)) {
            throw SingularityError("normal equations are singular; a positive l2 is required");
        }
        const double ljj = std::sqrt(diag);
        a[static_cast<std::size_t>(j) * d + j] = ljj;
        for (int i = j + 1; i < d; ++i) {
            double v = a[static_cast<std::size_t>(i) * d + j];
            for (int k = 0; k < j; ++k) {
                v -= a[static_cast<std::size_t>(i) * d + k] *
                     a[static_cast<std::size_t>(j) * d + k];
            }
            a[static_cast<std::size_t>(i) * d + j] = v / ljj;
        }
    }
    // forward then backward substitution
    for (int i = 0; i < d; ++i) {
        double v = b[i];
        for (int k = 0; k < i; ++k) {
            v -= a[static_cast<std::size_t>(i) * d + k] * b[k];
        }
        b[i] = v / a[static_cast<std::size_t>(i) * d + i];
    }
    for (int i = d - 1; i >= 0; --i) {
        double v = b[i];
        for (int k = i + 1; k < d; ++k) {
            v -= a[static_cast<std::size_t>(k) * d + i] * b[k];
        }
        b[i] = v / a[static_cast<std::size_t>(i) * d + i];
    }
    return b;
}

double soft_threshold(double v, double t) {
    if (v > t) {
        return v - t;
    }
    if (v < -t) {
        return v + t;
    }
    return 0.0;
}

// Largest eigenvalue of (1/n) X'X by power iteration.
double gram_spectral_norm(const Tensor2<double>& x) {
    const int n = x.rows, d = x.cols;
    std::vector<double> v(d, 1.0 / std::sqrt(static_cast<double>(d)));
    std::vector<double> xv(n), next(d);
    double lambda = 0.0;
    for (int it = 0; it < 100; ++it) {
        for (int i = 0; i < n; ++i) {
            const double* row = x.row(i);
            double acc = 0.0;
            for (int j = 0; j < d; ++j) {
                acc += row[j] * v[j];
            }
            xv[i] = acc;
        }
        std::fill(next.begin(), next.end(), 0.0);
        for (int i = 0; i < n; ++i) {
            const double* row = x.row(i);
            const double s = xv[i];
            for (int j = 0; j < d; ++j) {
                next[j] += row[j] * s;
            }
        }
        double norm = 0.0;
        for (int j = 0; j < d; ++j) {
            next[j] /= n;
            norm += next[j] * next[j];
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            return 0.0;
        }
        lambda = norm;
        for (int j = 0; j < d; ++j) {
            v[j] = next[j] / norm;
        }
    }
    return lambda;
}

}  // namespace

LinearModel fit_ridge(const Tensor2<double>& x, std::span<const double> y, double lambda_l2) {
    if (lambda_l2 < 0.0) {
        throw ConfigError("lambda_l2 must be >= 0");
    }
    const int d = x.cols;
    auto c = center_data(x, y, /*scale=*/false);
    std::vector<double> gram(static_cast<std::size_t>(d) * d, 0.0);
    std::vector<double> xty(d, 0.0);
    for (int i = 0; i < c.x.rows; ++i) {
        const double* row = c.x.row(i);
        for (int j = 0; j < d; ++j) {
            xty[j] += row[j] * c.y[i];
            const double xj = row[j];
            for (int k = j; k < d; ++k) {
                gram[static_cast<std::size_t>(j) * d + k] += xj * row[k];
            }
        }
    }
    for (int j = 0; j < d; ++j) {
        gram[static_cast<std::size_t>(j) * d + j] += lambda_l2;
        for (int k = j + 1; k < d; ++k) {
            gram[static_cast<std::size_t>(k) * d + j] = gram[static_cast<std::size_t>(j) * d + k];
        }
    }
    auto w = cholesky_solve(std::move(gram), std::move(xty), d);
    auto model = finalize(c, std::move(w), PenaltyKind::Ridge);
    model.lambda_l2 = lambda_l2;
    return model;
}

LinearModel fit_lasso(const Tensor2<double>& x, std::span<const double> y, double lambda_l1) {
    if (lambda_l1 < 0.0) {
        throw ConfigError("lambda_l1 must be >= 0");
    }
    auto c = center_data(x, y, /*scale=*/true);
    const int n = c.x.rows, d = c.x.cols;

    // Columns are standardized, so x_j' x_j = n except for constant features,
    // whose centered column is identically zero; those stay at weight 0.
    std::vector<double> col_norm(d, 0.0);
    for (int i = 0; i < n; ++i) {
        const double* row = c.x.row(i);
        for (int j = 0; j < d; ++j) {
            col_norm[j] += row[j] * row[j];
        }
    }

    std::vector<double> w(d, 0.0);
    std::vector<double> residual = c.y;  // r = y - Xw
    const int max_sweeps = 10000;
    double max_delta = 0.0;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        max_delta = 0.0;
        for (int j = 0; j < d; ++j) {
            if (col_norm[j] == 0.0) {
                continue;
            }
            double dot = 0.0;
            for (int i = 0; i < n; ++i) {
                dot += c.x(i, j) * residual[i];
            }
            const double rho = dot / n + w[j] * (col_norm[j] / n);
            const double w_new = soft_threshold(rho, lambda_l1) / (col_norm[j] / n);
            const double delta = w_new - w[j];
            if (delta != 0.0) {
                for (int i = 0; i < n; ++i) {
                    residual[i] -= delta * c.x(i, j);
                }
                w[j] = w_new;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        if (max_delta < 1e-8) {
            auto model = finalize(c, std::move(w), PenaltyKind::Lasso);
            model.lambda_l1 = lambda_l1;
            return model;
        }
    }
    double res_norm = 0.0;
    for (double r : residual) {
        res_norm += r * r;
    }
    throw ConvergenceError("lasso did not converge in " + std::to_string(max_sweeps) +
                           " sweeps (last max coefficient change " + std::to_string(max_delta) +
                           ", residual sum of squares " + std::to_string(res_norm) + ")");
}

UndirectedEdges collect_undirected_edges(const KnowledgeGraph& feature_graph) {
    UndirectedEdges out;
    out.degree.assign(feature_graph.node_count(), 0);
    for (int j = 0; j < feature_graph.node_count(); ++j) {
        for (int k : feature_graph.undirected_neighbors(j)) {
            if (j < k) {
                out.edges.emplace_back(j, k);
            }
        }
    }
    for (const auto& [a, b] : out.edges) {
        ++out.degree[a];
        ++out.degree[b];
    }
    return out;
}

double graph_penalty_value(const KnowledgeGraph& feature_graph, PenaltyKind variant,
                           double lambda_graph, std::span<const double> weights) {
    const auto und = collect_undirected_edges(feature_graph);
    double acc = 0.0;
    switch (variant) {
        case PenaltyKind::GraphNet:
            for (const auto& [a, b] : und.edges) {
                const double diff = weights[a] - weights[b];
                acc += diff * diff;
            }
            break;
        case PenaltyKind::NcLasso:
            for (const auto& [a, b] : und.edges) {
                const double diff = weights[a] / std::sqrt(und.degree[a]) -
                                    weights[b] / std::sqrt(und.degree[b]);
                acc += diff * diff;
            }
            break;
        case PenaltyKind::NetworkLasso:
            for (const auto& [a, b] : und.edges) {
                acc += std::abs(weights[a] - weights[b]);
            }
            break;
        default:
            throw ConfigError("not a graph penalty");
    }
    return lambda_graph * acc;
}

LinearModel fit_graph_regularized(const Tensor2<double>& x, std::span<const double> y,
                                  const KnowledgeGraph& feature_graph, PenaltyKind variant,
                                  double lambda_graph, double lambda_l1) {
    if (variant != PenaltyKind::GraphNet && variant != PenaltyKind::NcLasso &&
        variant != PenaltyKind::NetworkLasso) {
        throw ConfigError("fit_graph_regularized requires a graph penalty variant");
    }
    if (lambda_graph < 0.0 || lambda_l1 < 0.0) {
        throw ConfigError("penalty coefficients must be >= 0");
    }
    if (feature_graph.node_count() != x.cols) {
        throw ValidationError("feature graph does not match the feature count");
    }
    auto c = center_data(x, y, /*scale=*/true);
    const int n = c.x.rows, d = c.x.cols;
    const auto und = collect_undirected_edges(feature_graph);

    std::vector<double> inv_sqrt_deg(d, 0.0);
    for (int j = 0; j < d; ++j) {
        if (und.degree[j] > 0) {
            inv_sqrt_deg[j] = 1.0 / std::sqrt(static_cast<double>(und.degree[j]));
        }
    }
    const int max_degree =
        und.degree.empty() ? 0 : *std::max_element(und.degree.begin(), und.degree.end());

    auto mse_value = [&](const std::vector<double>& w, std::vector<double>& residual) {
        residual = c.y;
        for (int i = 0; i < n; ++i) {
            const double* row = c.x.row(i);
            double acc = 0.0;
            for (int j = 0; j < d; ++j) {
                acc += row[j] * w[j];
            }
            residual[i] -= acc;
        }
        double sq = 0.0;
        for (double r : residual) {
            sq += r * r;
        }
        return sq / (2.0 * n);
    };

    auto graph_grad = [&](const std::vector<double>& w, std::vector<double>& grad) {
        switch (variant) {
            case PenaltyKind::GraphNet:
                for (const auto& [a, b] : und.edges) {
                    const double g = 2.0 * lambda_graph * (w[a] - w[b]);
                    grad[a] += g;
                    grad[b] -= g;
                }
                break;
            case PenaltyKind::NcLasso:
                for (const auto& [a, b] : und.edges) {
                    const double diff = w[a] * inv_sqrt_deg[a] - w[b] * inv_sqrt_deg[b];
                    grad[a] += 2.0 * lambda_graph * diff * inv_sqrt_deg[a];
                    grad[b] -= 2.0 * lambda_graph * diff * inv_sqrt_deg[b];
                }
                break;
            case PenaltyKind::NetworkLasso:
                for (const auto& [a, b] : und.edges) {
                    const double diff = w[a] - w[b];
                    const double s = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
                    grad[a] += lambda_graph * s;
                    grad[b] -= lambda_graph * s;
                }
                break;
            default:
                break;
        }
    };

    auto objective = [&](const std::vector<double>& w, std::vector<double>& residual) {
        double obj = mse_value(w, residual);
        if (lambda_l1 > 0.0) {
            for (double v : w) {
                obj += lambda_l1 * std::abs(v);
            }
        }
        if (lambda_graph > 0.0) {
            obj += graph_penalty_value(feature_graph, variant, lambda_graph, w);
        }
        return obj;
    };

    std::vector<double> w(d, 0.0), grad(d), residual(n), w_next(d);
    const double lip_mse = std::max(gram_spectral_norm(c.x), 1e-12);

    if (variant == PenaltyKind::NetworkLasso) {
        // The graph term is nonsmooth: proximal-subgradient with step c/sqrt(t).
        const double step0 = 1.0 / lip_mse;
        const int max_iters = 5000;
        std::vector<double> best_w = w;
        double best_obj = objective(w, residual);
        double window_best = best_obj;
        for (int t = 0; t < max_iters; ++t) {
            mse_value(w, residual);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (int i = 0; i < n; ++i) {
                const double* row = c.x.row(i);
                const double r = residual[i] / n;
                for (int j = 0; j < d; ++j) {
                    grad[j] -= row[j] * r;
                }
            }
            graph_grad(w, grad);
            const double step = step0 / std::sqrt(static_cast<double>(t + 1));
            for (int j = 0; j < d; ++j) {
                w[j] = soft_threshold(w[j] - step * grad[j], step * lambda_l1);
            }
            const double obj = objective(w, residual);
            if (!std::isfinite(obj)) {
                throw ConvergenceError("network lasso diverged at iteration " +
                                       std::to_string(t));
            }
            if (obj < best_obj) {
                best_obj = obj;
                best_w = w;
            }
            if ((t + 1) % 100 == 0) {
                // Stationarity proxy for the diminishing-step scheme.
                if (window_best - best_obj < 1e-5 * std::max(1.0, std::abs(best_obj))) {
                    break;
                }
                window_best = best_obj;
            }
        }
        auto model = finalize(c, std::move(best_w), variant);
        model.lambda_graph = lambda_graph;
        model.lambda_l1 = lambda_l1;
        return model;
    }

    // Smooth graph penalty: proximal gradient with a Lipschitz-based step.
    double lip = lip_mse;
    if (variant == PenaltyKind::GraphNet) {
        lip += 4.0 * lambda_graph * std::max(max_degree, 1);
    } else {
        lip += 4.0 * lambda_graph;  // normalized Laplacian spectrum is bounded by 2
    }
    double step = 1.0 / lip;
    const int max_iters = 20000;
    double prev_obj = objective(w, residual);
    for (int t = 0; t < max_iters; ++t) {
        mse_value(w, residual);
        std::fill(grad.begin(), grad.end(), 0.0);
        for (int i = 0; i < n; ++i) {
            const double* row = c.x.row(i);
            const double r = residual[i] / n;
            for (int j = 0; j < d; ++j) {
                grad[j] -= row[j] * r;
            }
        }
        graph_grad(w, grad);
        double max_move = 0.0;
        for (int j = 0; j < d; ++j) {
            w_next[j] = soft_threshold(w[j] - step * grad[j], step * lambda_l1);
            max_move = std::max(max_move, std::abs(w_next[j] - w[j]));
        }
        const double obj = objective(w_next, residual);
        if (!std::isfinite(obj)) {
            throw ConvergenceError("graph-regularized fit diverged at iteration " +
                                   std::to_string(t));
        }
        if (obj > prev_obj + 1e-12) {
            step *= 0.5;  // monotone safeguard
            if (step < 1e-18) {
                throw ConvergenceError("graph-regularized fit: step size collapsed");
            }
            continue;
        }
        w.swap(w_next);
        prev_obj = obj;
        if (max_move / step <= 1e-5) {
            auto model = finalize(c, std::move(w), variant);
            model.lambda_graph = lambda_graph;
            model.lambda_l1 = lambda_l1;
            return model;
        }
    }
    throw ConvergenceError("graph-regularized fit did not reach the 1e-5 stationarity "
                           "tolerance in " +
                           std::to_string(max_iters) + " iterations");
}

}  // namespace plato
