#include "precsel/mlkit/preprocessing.hpp"

#include <algorithm>
#include <cmath>

#include "precsel/error.hpp"

namespace precsel {

Standardizer Standardizer::fit(const RowMatrix& x) {
    if (x.rows() < 2) throw ContractError("standardize_fit needs at least 2 rows");
    Standardizer s;
    s.mean = x.colwise().mean().transpose();
    s.scale.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double var = (x.col(j).array() - s.mean(j)).square().sum() / static_cast<double>(x.rows());
        const double sd = std::sqrt(var);
        s.scale(j) = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

RowMatrix Standardizer::apply(const RowMatrix& x) const {
    if (x.cols() != mean.size()) throw ShapeError("standardizer dimension mismatch");
    RowMatrix out = x;
    for (Eigen::Index j = 0; j < x.cols(); ++j) out.col(j) = (x.col(j).array() - mean(j)) / scale(j);
    return out;
}

Eigen::VectorXd Standardizer::apply(const Eigen::VectorXd& x) const {
    if (x.size() != mean.size()) throw ShapeError("standardizer dimension mismatch");
    return (x - mean).cwiseQuotient(scale);
}

MedianImputer MedianImputer::fit(const RowMatrix& x) {
    MedianImputer m;
    m.median = Eigen::VectorXd::Zero(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        std::vector<double> v;
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            if (std::isfinite(x(i, j))) v.push_back(x(i, j));
        if (v.empty()) continue;
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        m.median(j) = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }
    return m;
}

RowMatrix MedianImputer::apply(const RowMatrix& x) const {
    if (x.cols() != median.size()) throw ShapeError("imputer dimension mismatch");
    RowMatrix out = x;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            if (!std::isfinite(out(i, j))) out(i, j) = median(j);
    return out;
}

Eigen::VectorXd MedianImputer::apply(const Eigen::VectorXd& x) const {
    if (x.size() != median.size()) throw ShapeError("imputer dimension mismatch");
    Eigen::VectorXd out = x;
    for (Eigen::Index j = 0; j < x.size(); ++j)
        if (!std::isfinite(out(j))) out(j) = median(j);
    return out;
}

PcaBasis pca_fit(const RowMatrix& x, double variance_target) {
    if (x.rows() < 2) throw ContractError("pca_fit needs at least 2 rows");
    PcaBasis b;
    b.mean = x.colwise().mean().transpose();
    Eigen::MatrixXd centered = x.rowwise() - b.mean.transpose();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();
    const Eigen::Index keep_max = std::min<Eigen::Index>(x.rows() - 1, x.cols());
    Eigen::VectorXd var = sv.head(keep_max).array().square();
    const double total = var.sum();
    b.explained_ratio = total > 0.0 ? Eigen::VectorXd(var / total) : Eigen::VectorXd::Zero(keep_max);

    int r = 0;
    double cum = 0.0;
    while (r < keep_max && cum < variance_target) {
        cum += b.explained_ratio(r);
        ++r;
    }
    if (total <= 0.0) r = std::min<Eigen::Index>(1, keep_max);
    b.retained = r;
    b.components = svd.matrixV().leftCols(r);
    for (int c = 0; c < r; ++c) {
        Eigen::Index arg;
        b.components.col(c).cwiseAbs().maxCoeff(&arg);
        if (b.components(arg, c) < 0.0) b.components.col(c) *= -1.0;
    }
    return b;
}

Eigen::VectorXd PcaBasis::apply(const Eigen::VectorXd& x) const {
    if (x.size() != mean.size()) throw ShapeError("PCA dimension mismatch");
    return components.transpose() * (x - mean);
}

RowMatrix PcaBasis::apply(const RowMatrix& x) const {
    if (x.cols() != mean.size()) throw ShapeError("PCA dimension mismatch");
    return (x.rowwise() - mean.transpose()) * components;
}

Eigen::VectorXd PcaBasis::reconstruct(const Eigen::VectorXd& z) const { return mean + components * z; }

}  // namespace precsel
