#pragma once

#include <Eigen/Dense>
#include <vector>

namespace precsel {

/// Row-major sample matrix: one row per sample.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-feature z-scoring. Zero-variance features keep a unit divisor, so
/// they map to x - mean.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    static Standardizer fit(const RowMatrix& x);
    RowMatrix apply(const RowMatrix& x) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

/// Replaces NaN entries by the per-column median of the non-NaN training
/// values (0 when a column has no finite values).
struct MedianImputer {
    Eigen::VectorXd median;

    static MedianImputer fit(const RowMatrix& x);
    RowMatrix apply(const RowMatrix& x) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

struct PcaBasis {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;        // d x r, orthonormal columns
    Eigen::VectorXd explained_ratio;   // all min(n-1, d) ratios, descending
    int retained = 0;

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    RowMatrix apply(const RowMatrix& x) const;
    /// Maps reduced coordinates back to the input space.
    Eigen::VectorXd reconstruct(const Eigen::VectorXd& z) const;
};

/// Centered SVD; keeps the shortest prefix whose variance ratios sum to at
/// least `variance_target`. Component signs are fixed so the largest-magnitude
/// entry of each component is positive.
PcaBasis pca_fit(const RowMatrix& x, double variance_target = 0.99);

}  // namespace precsel
