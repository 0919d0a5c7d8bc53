#pragma once

#include <cstdint>
#include <vector>

#include "precsel/mlkit/preprocessing.hpp"

namespace precsel {

/// Binary label matrix: samples x labels, entries 0 or 1.
using LabelMatrix = RowMatrix;

struct KnnParams {
    int k = 5;
    RowMatrix x;
    LabelMatrix y;
};

KnnParams fit_knn(const RowMatrix& x, const LabelMatrix& y, int k);
/// Per-label counts among the k nearest training rows (Euclidean; ties by
/// training index).
Eigen::VectorXi knn_label_counts(const KnnParams& p, const Eigen::VectorXd& q);

/// One binary logistic regression per label, L2 penalty on the weights.
struct LogRegParams {
    Eigen::MatrixXd w;  // d x K
    Eigen::VectorXd b;  // K
    double lambda = 1.0;
};

struct LogRegOptions {
    double lambda = 1.0;
    int max_iter = 20000;
    double tol = 1e-8;  // gradient-norm stopping rule
};

/// Minimizes sum_i BCE_i / n + lambda / (2n) ||w||^2 per label by gradient
/// descent with a 1/L step.
LogRegParams fit_logreg(const RowMatrix& x, const LabelMatrix& y, const LogRegOptions& opts = {});
/// Sigmoid scores, one per label.
Eigen::VectorXd logreg_scores(const LogRegParams& p, const Eigen::VectorXd& q);
/// Objective value summed over labels.
double logreg_objective(const LogRegParams& p, const RowMatrix& x, const LabelMatrix& y);

struct TreeNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0;  // fraction of positives reaching the node
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
    double predict(const Eigen::VectorXd& q) const;
};

struct ForestOptions {
    int trees = 100;
    int max_depth = 0;  // 0 = unlimited
    int min_samples_split = 2;
};

struct ForestParams {
    std::vector<std::vector<DecisionTree>> trees;  // per label
};

/// Binary-relevance random forest: bootstrap samples, Gini splits over
/// sqrt(d) randomly chosen features per node.
ForestParams fit_forest(const RowMatrix& x, const LabelMatrix& y, const ForestOptions& opts, std::uint64_t seed);
/// Mean leaf positive fraction over the trees, per label.
Eigen::VectorXd forest_scores(const ForestParams& p, const Eigen::VectorXd& q);

}  // namespace precsel
