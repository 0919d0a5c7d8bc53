#include "precsel/mlkit/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "precsel/error.hpp"

namespace precsel {
namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

void check_xy(const RowMatrix& x, const LabelMatrix& y) {
    if (x.rows() != y.rows()) throw ShapeError("sample and label counts differ");
    if (x.rows() < 1) throw ContractError("no training samples");
}

double gini(double pos, double total) {
    if (total <= 0.0) return 0.0;
    const double p = pos / total;
    return 2.0 * p * (1.0 - p);
}

class TreeBuilder {
public:
    TreeBuilder(const RowMatrix& x, const Eigen::VectorXd& y, const ForestOptions& opts, std::mt19937_64& rng)
        : x_(x), y_(y), opts_(opts), rng_(rng) {
        features_.resize(x.cols());
        std::iota(features_.begin(), features_.end(), 0);
        mtry_ = std::max<int>(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(x.cols())))));
    }

    DecisionTree build(std::vector<int> rows) {
        DecisionTree t;
        grow(t, rows, 0);
        return t;
    }

private:
    const RowMatrix& x_;
    const Eigen::VectorXd& y_;
    const ForestOptions& opts_;
    std::mt19937_64& rng_;
    std::vector<int> features_;
    int mtry_;

    int grow(DecisionTree& t, std::vector<int>& rows, int depth) {
        const int id = static_cast<int>(t.nodes.size());
        t.nodes.emplace_back();
        double pos = 0.0;
        for (int r : rows) pos += y_(r);
        const double n = static_cast<double>(rows.size());
        t.nodes[id].value = pos / n;
        const bool pure = pos == 0.0 || pos == n;
        if (pure || static_cast<int>(rows.size()) < opts_.min_samples_split ||
            (opts_.max_depth > 0 && depth >= opts_.max_depth))
            return id;

        // Partial Fisher-Yates picks mtry distinct candidate features.
        for (int k = 0; k < mtry_; ++k) {
            std::uniform_int_distribution<int> pick(k, static_cast<int>(features_.size()) - 1);
            std::swap(features_[k], features_[pick(rng_)]);
        }
        const double parent = gini(pos, n);
        double best_gain = 1e-12;
        int best_f = -1;
        double best_thr = 0.0;
        std::vector<int> sorted = rows;
        for (int k = 0; k < mtry_; ++k) {
            const int f = features_[k];
            std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
                return x_(a, f) < x_(b, f) || (x_(a, f) == x_(b, f) && a < b);
            });
            double left_pos = 0.0;
            for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
                left_pos += y_(sorted[i]);
                const double lo = x_(sorted[i], f), hi = x_(sorted[i + 1], f);
                if (!(hi > lo)) continue;
                const double nl = static_cast<double>(i + 1), nr = n - nl;
                const double child = (nl * gini(left_pos, nl) + nr * gini(pos - left_pos, nr)) / n;
                const double gain = parent - child;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_f = f;
                    best_thr = lo + 0.5 * (hi - lo);
                }
            }
        }
        if (best_f < 0) return id;

        std::vector<int> left, right;
        for (int r : rows) (x_(r, best_f) <= best_thr ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        t.nodes[id].feature = best_f;
        t.nodes[id].threshold = best_thr;
        const int l = grow(t, left, depth + 1);
        const int r = grow(t, right, depth + 1);
        t.nodes[id].left = l;
        t.nodes[id].right = r;
        return id;
    }
};

}  // namespace

KnnParams fit_knn(const RowMatrix& x, const LabelMatrix& y, int k) {
    check_xy(x, y);
    if (k < 1) throw ContractError("k must be positive");
    return {k, x, y};
}

Eigen::VectorXi knn_label_counts(const KnnParams& p, const Eigen::VectorXd& q) {
    if (q.size() != p.x.cols()) throw ShapeError("query dimension mismatch");
    const Eigen::Index n = p.x.rows();
    std::vector<std::pair<double, Eigen::Index>> d(n);
    for (Eigen::Index i = 0; i < n; ++i) d[i] = {(p.x.row(i).transpose() - q).squaredNorm(), i};
    const Eigen::Index k = std::min<Eigen::Index>(p.k, n);
    std::partial_sort(d.begin(), d.begin() + k, d.end());
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(p.y.cols());
    for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index l = 0; l < p.y.cols(); ++l) counts(l) += p.y(d[j].second, l) > 0.5;
    return counts;
}

LogRegParams fit_logreg(const RowMatrix& x, const LabelMatrix& y, const LogRegOptions& opts) {
    check_xy(x, y);
    const Eigen::Index n = x.rows(), d = x.cols(), K = y.cols();
    LogRegParams p;
    p.lambda = opts.lambda;
    p.w = Eigen::MatrixXd::Zero(d, K);
    p.b = Eigen::VectorXd::Zero(K);

    // Lipschitz constant of the gradient from the augmented Gram matrix.
    Eigen::MatrixXd xa(n, d + 1);
    xa << x, Eigen::VectorXd::Ones(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xa.transpose() * xa, Eigen::EigenvaluesOnly);
    const double lmax = es.eigenvalues().maxCoeff();
    const double L = (0.25 * lmax + opts.lambda) / static_cast<double>(n);
    const double step = 1.0 / L;

    for (Eigen::Index l = 0; l < K; ++l) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
        double b = 0.0;
        const Eigen::VectorXd t = y.col(l);
        for (int it = 0; it < opts.max_iter; ++it) {
            Eigen::VectorXd z = x * w + Eigen::VectorXd::Constant(n, b);
            Eigen::VectorXd r = z.unaryExpr([](double v) { return sigmoid(v); }) - t;
            Eigen::VectorXd gw = (x.transpose() * r + opts.lambda * w) / static_cast<double>(n);
            const double gb = r.sum() / static_cast<double>(n);
            if (std::sqrt(gw.squaredNorm() + gb * gb) <= opts.tol) break;
            w -= step * gw;
            b -= step * gb;
        }
        p.w.col(l) = w;
        p.b(l) = b;
    }
    return p;
}

Eigen::VectorXd logreg_scores(const LogRegParams& p, const Eigen::VectorXd& q) {
    if (q.size() != p.w.rows()) throw ShapeError("query dimension mismatch");
    Eigen::VectorXd z = p.w.transpose() * q + p.b;
    return z.unaryExpr([](double v) { return sigmoid(v); });
}

double logreg_objective(const LogRegParams& p, const RowMatrix& x, const LabelMatrix& y) {
    const double n = static_cast<double>(x.rows());
    double total = 0.0;
    for (Eigen::Index l = 0; l < y.cols(); ++l) {
        Eigen::VectorXd z = x * p.w.col(l) + Eigen::VectorXd::Constant(x.rows(), p.b(l));
        double s = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) s += softplus(z(i)) - y(i, l) * z(i);
        total += s / n + p.lambda / (2.0 * n) * p.w.col(l).squaredNorm();
    }
    return total;
}

double DecisionTree::predict(const Eigen::VectorXd& q) const {
    int id = 0;
    while (nodes[id].feature >= 0) id = q(nodes[id].feature) <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
    return nodes[id].value;
}

ForestParams fit_forest(const RowMatrix& x, const LabelMatrix& y, const ForestOptions& opts, std::uint64_t seed) {
    check_xy(x, y);
    if (opts.trees < 1) throw ContractError("forest needs at least one tree");
    std::mt19937_64 rng(seed);
    ForestParams p;
    const int n = static_cast<int>(x.rows());
    std::uniform_int_distribution<int> draw(0, n - 1);
    p.trees.resize(y.cols());
    for (Eigen::Index l = 0; l < y.cols(); ++l) {
        const Eigen::VectorXd t = y.col(l);
        TreeBuilder builder(x, t, opts, rng);
        for (int k = 0; k < opts.trees; ++k) {
            std::vector<int> rows(n);
            for (int& r : rows) r = draw(rng);
            p.trees[l].push_back(builder.build(std::move(rows)));
        }
    }
    return p;
}

Eigen::VectorXd forest_scores(const ForestParams& p, const Eigen::VectorXd& q) {
    Eigen::VectorXd s(p.trees.size());
    for (std::size_t l = 0; l < p.trees.size(); ++l) {
        double v = 0.0;
        for (const auto& t : p.trees[l]) v += t.predict(q);
        s(l) = v / static_cast<double>(p.trees[l].size());
    }
    return s;
}

}  // namespace precsel
