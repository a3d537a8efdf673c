#pragma once

#include <string>
#include <vector>

#include "plato/kg.hpp"
#include "plato/tensor.hpp"

namespace plato {

enum class PenaltyKind { Ridge, Lasso, GraphNet, NcLasso, NetworkLasso };

const char* to_string(PenaltyKind p);
PenaltyKind penalty_from_string(const std::string& s);

// Linear regression with intercept; coefficients in original feature units.
struct LinearModel {
    std::vector<double> weights;
    double intercept = 0.0;
    PenaltyKind penalty = PenaltyKind::Ridge;
    double lambda_graph = 0.0;
    double lambda_l1 = 0.0;
    double lambda_l2 = 0.0;

    double predict_one(std::span<const double> x) const;
    std::vector<double> predict(const Tensor2<double>& x) const;
};

// Closed form (X'X + lambda I) w = X'y on standardized features.
LinearModel fit_ridge(const Tensor2<double>& x, std::span<const double> y, double lambda_l2);

// Cyclic coordinate descent with soft thresholding on the objective
// (1/2n)||y - Xw||^2 + lambda ||w||_1.
LinearModel fit_lasso(const Tensor2<double>& x, std::span<const double> y, double lambda_l1);

// (1/2n)||y - Xw||^2 + lambda_l1 ||w||_1 + graph penalty over the collapsed
// feature graph:
//   GraphNet       lambda_g * sum_(j,k) (w_j - w_k)^2
//   NcLasso        lambda_g * sum_(j,k) (w_j/sqrt(D_j) - w_k/sqrt(D_k))^2
//   NetworkLasso   lambda_g * sum_(j,k) |w_j - w_k|
// Smooth variants run proximal gradient descent; NetworkLasso uses
// proximal-subgradient steps with a diminishing step size.
LinearModel fit_graph_regularized(const Tensor2<double>& x, std::span<const double> y,
                                  const KnowledgeGraph& feature_graph, PenaltyKind variant,
                                  double lambda_graph, double lambda_l1);

// Value of the graph penalty term for a weight vector (used by tests and the
// solvers; iterates each undirected edge exactly once).
double graph_penalty_value(const KnowledgeGraph& feature_graph, PenaltyKind variant,
                           double lambda_graph, std::span<const double> weights);

// Undirected edges of the collapsed feature graph, each listed once, plus
// node degrees in that undirected view.
struct UndirectedEdges {
    std::vector<std::pair<int, int>> edges;
    std::vector<int> degree;
};
UndirectedEdges collect_undirected_edges(const KnowledgeGraph& feature_graph);

}  // namespace plato
