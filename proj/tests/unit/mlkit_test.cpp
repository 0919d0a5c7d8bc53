#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "precsel/mlkit/model.hpp"
#include "precsel/synth/generators.hpp"

namespace precsel {
namespace {

RowMatrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    RowMatrix x(rows, cols);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
    return x;
}

TEST(Standardize, Examples) {
    RowMatrix x(2, 1);
    x << 0, 2;
    auto s = Standardizer::fit(x);
    EXPECT_DOUBLE_EQ(s.mean(0), 1.0);
    EXPECT_DOUBLE_EQ(s.scale(0), 1.0);
    EXPECT_DOUBLE_EQ(s.apply(Eigen::VectorXd(Eigen::VectorXd::Constant(1, 0.0)))(0), -1.0);

    RowMatrix c = RowMatrix::Constant(4, 1, 7.0);
    auto sc = Standardizer::fit(c);
    EXPECT_DOUBLE_EQ(sc.scale(0), 1.0);
    EXPECT_EQ(sc.apply(c), RowMatrix::Zero(4, 1));

    RowMatrix g = gaussian(30, 5, 1) * 3.0;
    g.col(2).array() += 100.0;
    auto sg = Standardizer::fit(g);
    RowMatrix z = sg.apply(g);
    for (Eigen::Index j = 0; j < z.cols(); ++j) EXPECT_NEAR(z.col(j).mean(), 0.0, 1e-12);
}

TEST(Impute, MedianOfFiniteValues) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    RowMatrix x(4, 2);
    x << 1, nan, nan, nan, 3, nan, 10, nan;
    auto imp = MedianImputer::fit(x);
    EXPECT_DOUBLE_EQ(imp.median(0), 3.0);
    EXPECT_DOUBLE_EQ(imp.median(1), 0.0);
    RowMatrix y = imp.apply(x);
    EXPECT_DOUBLE_EQ(y(1, 0), 3.0);
    EXPECT_DOUBLE_EQ(y(2, 1), 0.0);
    EXPECT_DOUBLE_EQ(y(3, 0), 10.0);
}

TEST(Pca, PointsOnALineKeepOneComponent) {
    RowMatrix x(3, 2);
    x << 0, 0, 1, 1, 2, 2;
    auto b = pca_fit(x);
    EXPECT_EQ(b.retained, 1);
    EXPECT_NEAR(b.components(0, 0), std::sqrt(0.5), 1e-12);
    EXPECT_NEAR(b.components(1, 0), std::sqrt(0.5), 1e-12);
}

TEST(Pca, FullBasisReconstructs) {
    RowMatrix x = gaussian(40, 3, 2);
    auto b = pca_fit(x, 1.0);
    ASSERT_EQ(b.retained, 3);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Eigen::VectorXd row = x.row(i).transpose();
        EXPECT_LT((b.reconstruct(b.apply(row)) - row).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Pca, RatiosMatchCovarianceEigendecomposition) {
    RowMatrix x = gaussian(20, 50, 3);
    auto b = pca_fit(x);
    RowMatrix c = x.rowwise() - x.colwise().mean();
    Eigen::MatrixXd cov = c.transpose() * c / 19.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    Eigen::VectorXd ev = es.eigenvalues().reverse();
    const double total = ev.sum();
    ASSERT_EQ(b.explained_ratio.size(), 19);
    for (Eigen::Index k = 0; k < 19; ++k) EXPECT_NEAR(b.explained_ratio(k), ev(k) / total, 1e-8) << k;
    EXPECT_GE(b.explained_ratio.head(b.retained).sum(), 0.99);
    EXPECT_LT(b.explained_ratio.head(b.retained - 1).sum(), 0.99);
}

TEST(Pca, OrthonormalAndIdempotent) {
    RowMatrix x = gaussian(25, 12, 4);
    x.col(3) = 2.0 * x.col(1) - x.col(0);
    auto b = pca_fit(x, 0.9);
    const Eigen::Index r = b.components.cols();
    EXPECT_LT((b.components.transpose() * b.components - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff(), 1e-10);
    Eigen::VectorXd z = gaussian(1, r, 5).row(0).transpose();
    EXPECT_LT((b.apply(b.reconstruct(z)) - z).cwiseAbs().maxCoeff(), 1e-10);
    for (Eigen::Index k = 0; k < r; ++k) {
        Eigen::Index arg;
        b.components.col(k).cwiseAbs().maxCoeff(&arg);
        EXPECT_GT(b.components(arg, k), 0.0);
    }
}

TEST(Decide, ThresholdAndFallback) {
    Eigen::VectorXd s(4);
    s << 0.9, 0.6, 0.1, 0.2;
    EXPECT_EQ(decide(s, 0.5, 3), (LabelSet{0, 1}));
    EXPECT_EQ(decide(Eigen::VectorXd::Constant(4, 0.49), 0.5, 2), (LabelSet{2}));
    EXPECT_EQ(decide(Eigen::VectorXd::Constant(2, 0.5), 0.5, 1), (LabelSet{0, 1}));
}

TEST(Knn, MajorityCounts) {
    // Query at the origin; five nearest carry label 0 three times, label 1 twice.
    RowMatrix x(6, 1);
    x << 1, 2, 3, 4, 5, 100;
    LabelMatrix y(6, 3);
    y << 1, 0, 0, 1, 1, 0, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 1;
    auto p = fit_knn(x, y, 5);
    auto counts = knn_label_counts(p, Eigen::VectorXd::Zero(1));
    EXPECT_EQ(counts, (Eigen::Vector3i(3, 2, 0)));
}

std::vector<Sample> scalar_samples(const RowMatrix& x) {
    std::vector<Sample> out;
    for (Eigen::Index i = 0; i < x.rows(); ++i) out.push_back({std::vector<double>(x.row(i).begin(), x.row(i).end()), {}});
    return out;
}

const std::vector<std::string> kNames3{"A", "B", "C"};

LabelSet row_labels(const LabelMatrix& y, Eigen::Index i) {
    LabelSet out;
    for (Eigen::Index l = 0; l < y.cols(); ++l)
        if (y(i, l) > 0.5) out.push_back(static_cast<int>(l));
    return out;
}

LabelMatrix random_labels(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    LabelMatrix y = LabelMatrix::Zero(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i, rng() % 3) = 1;
        if (rng() % 4 == 0) y(i, rng() % 3) = 1;
    }
    return y;
}

TEST(Fit, BenchmarkPredictsMostFrequent) {
    LabelMatrix y(4, 3);
    y << 0, 1, 0, 1, 1, 0, 0, 1, 1, 0, 0, 1;
    auto x = scalar_samples(gaussian(4, 2, 1));
    auto m = fit_model(ModelKind::benchmark, FeatureSet::scalar, x, y, kNames3, {}, 0);
    for (const auto& s : scalar_samples(gaussian(10, 2, 2))) EXPECT_EQ(m.predict(s), (LabelSet{1}));
    EXPECT_EQ(most_frequent_label(y), 1);
}

TEST(Fit, KnnOneReproducesTrainingLabels) {
    RowMatrix xm = gaussian(15, 4, 6);
    LabelMatrix y = random_labels(15, 7);
    FitConfig cfg;
    cfg.knn_k = 1;
    auto x = scalar_samples(xm);
    auto m = fit_model(ModelKind::knn, FeatureSet::scalar, x, y, kNames3, cfg, 0);
    for (Eigen::Index i = 0; i < 15; ++i) EXPECT_EQ(m.predict(x[i]), row_labels(y, i)) << i;
}

TEST(Fit, LogregSeparatesLinearlySeparableToy) {
    RowMatrix xm(4, 2);
    xm << -2, -1, -1, -2, 1, 2, 2, 1;
    LabelMatrix y(4, 2);
    y << 1, 0, 1, 0, 0, 1, 0, 1;
    auto x = scalar_samples(xm);
    auto m = fit_model(ModelKind::logreg, FeatureSet::scalar, x, y, {"neg", "pos"}, {}, 0);
    for (Eigen::Index i = 0; i < 4; ++i) EXPECT_EQ(m.predict(x[i]), row_labels(y, i));
}

TEST(Fit, LogregReachesStationaryPoint) {
    RowMatrix x = gaussian(30, 3, 11);
    LabelMatrix y = random_labels(30, 12);
    LogRegOptions o;
    auto p = fit_logreg(x, y, o);
    // Perturbing any weight can only raise the convex objective.
    const double f = logreg_objective(p, x, y);
    for (Eigen::Index j = 0; j < p.w.size(); ++j)
        for (double d : {1e-3, -1e-3}) {
            auto q = p;
            q.w.data()[j] += d;
            EXPECT_GE(logreg_objective(q, x, y), f - 1e-12);
        }
}

TEST(Fit, ForestLearnsThresholdRule) {
    RowMatrix xm = gaussian(80, 3, 21);
    LabelMatrix y(80, 2);
    for (Eigen::Index i = 0; i < 80; ++i) {
        y(i, 0) = xm(i, 1) > 0.2;
        y(i, 1) = 1 - y(i, 0);
    }
    auto x = scalar_samples(xm);
    auto m = fit_model(ModelKind::rforest, FeatureSet::scalar, x, y, {"hi", "lo"}, {}, 5);
    int correct = 0;
    for (Eigen::Index i = 0; i < 80; ++i) correct += m.predict(x[i]) == row_labels(y, i);
    EXPECT_GE(correct, 76);
    auto again = fit_model(ModelKind::rforest, FeatureSet::scalar, x, y, {"hi", "lo"}, {}, 5);
    EXPECT_EQ(m.to_json(), again.to_json());
}

TEST(Fit, RejectsBadInputs) {
    auto x = scalar_samples(gaussian(4, 2, 1));
    EXPECT_THROW(fit_model(ModelKind::knn, FeatureSet::scalar, x, LabelMatrix::Zero(4, 3), kNames3, {}, 0), DataError);
    EXPECT_THROW(fit_model(ModelKind::knn, FeatureSet::scalar, x, LabelMatrix::Ones(3, 3), kNames3, {}, 0), ShapeError);
    EXPECT_THROW(fit_model(ModelKind::knn, FeatureSet::scalar, x, LabelMatrix::Ones(4, 2), kNames3, {}, 0), ShapeError);
    auto m = fit_model(ModelKind::knn, FeatureSet::scalar, x, LabelMatrix::Ones(4, 3), kNames3, {}, 0);
    EXPECT_THROW(m.predict({{1.0}, {}}), ShapeError);
    EXPECT_THROW(parse_model_kind("svc"), DataError);
    EXPECT_EQ(parse_model_kind("CNN"), ModelKind::cnn);
}

// Image-bearing samples for the feature sets that need them.
std::vector<Sample> image_samples(int count, int m, std::uint64_t seed) {
    std::vector<Sample> out;
    for (int i = 0; i < count; ++i) {
        auto a = synth::random_sparse(24 + i % 5, 0.05 + 0.02 * (i % 7), seed + i);
        Sample s;
        s.image = encode_image(a, m, {20, 40});
        std::mt19937_64 rng(seed * 31 + i);
        std::normal_distribution<double> n(0.0, 1.0);
        for (int k = 0; k < 9; ++k) s.scalar.push_back(n(rng));
        out.push_back(std::move(s));
    }
    return out;
}

struct KindCase {
    ModelKind kind;
    FeatureSet features;
};

FitConfig quick_config() {
    FitConfig cfg;
    cfg.forest.trees = 10;
    cfg.mlp_hidden = 8;
    cfg.train.epochs = 3;
    cfg.train.batch = 4;
    cfg.cnn.conv1 = 2;
    cfg.cnn.conv2 = 2;
    cfg.cnn.hidden = 4;
    return cfg;
}

const std::vector<KindCase> kAllKinds{
    {ModelKind::benchmark, FeatureSet::scalar}, {ModelKind::knn, FeatureSet::scalar},
    {ModelKind::knn, FeatureSet::extended},     {ModelKind::logreg, FeatureSet::scalar},
    {ModelKind::logreg, FeatureSet::image},     {ModelKind::rforest, FeatureSet::extended},
    {ModelKind::mlp, FeatureSet::scalar},       {ModelKind::cnn, FeatureSet::image},
};

TEST(Predict, NonemptyForEveryKindAndSerializationRoundTrips) {
    auto train = image_samples(16, 8, 100);
    auto probe = image_samples(12, 8, 900);
    LabelMatrix y = random_labels(16, 3);
    FitConfig cfg = quick_config();
    cfg.threshold = 0.97;  // pushes most score-based predictions onto the fallback path
    for (const auto& c : kAllKinds) {
        SCOPED_TRACE(std::string(to_string(c.kind)) + "/" + std::string(to_string(c.features)));
        auto m = fit_model(c.kind, c.features, train, y, kNames3, cfg, 4);
        auto back = TrainedModel::from_json(m.to_json());
        EXPECT_EQ(back.to_json(), m.to_json());
        for (const auto& s : probe) {
            auto p = m.predict(s);
            EXPECT_GE(p.size(), 1u);
            EXPECT_TRUE(std::is_sorted(p.begin(), p.end()));
            EXPECT_EQ(back.predict(s), p);
            EXPECT_EQ(back.scores(s), m.scores(s));
        }
    }
}

TEST(Model, FileRoundTripAndVersionCheck) {
    auto train = image_samples(6, 4, 5);
    LabelMatrix y = random_labels(6, 8);
    auto m = fit_model(ModelKind::knn, FeatureSet::extended, train, y, kNames3, {}, 1);
    auto path = std::filesystem::temp_directory_path() / "precsel_model_test.json";
    m.save(path);
    auto back = TrainedModel::load(path);
    EXPECT_EQ(back.to_json(), m.to_json());
    std::filesystem::remove(path);

    std::string text = m.to_json();
    const auto pos = text.find("\"version\":1");
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, 11, "\"version\":9");
    EXPECT_THROW(TrainedModel::from_json(text), UnsupportedFormat);
    EXPECT_THROW(TrainedModel::from_json("{"), ParseError);
    EXPECT_THROW(TrainedModel::load("/nonexistent/model.json"), IoError);
}

TEST(Fit, PermutationInvariance) {
    RowMatrix xm = gaussian(20, 4, 40);
    LabelMatrix y = random_labels(20, 41);
    std::vector<int> perm(20);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(2));
    RowMatrix xp(20, 4);
    LabelMatrix yp(20, 3);
    for (int i = 0; i < 20; ++i) {
        xp.row(i) = xm.row(perm[i]);
        yp.row(i) = y.row(perm[i]);
    }
    auto x = scalar_samples(xm), xs = scalar_samples(xp);
    auto probe = scalar_samples(gaussian(30, 4, 42));
    for (ModelKind k : {ModelKind::knn, ModelKind::benchmark}) {
        auto a = fit_model(k, FeatureSet::scalar, x, y, kNames3, {}, 0);
        auto b = fit_model(k, FeatureSet::scalar, xs, yp, kNames3, {}, 0);
        for (const auto& s : probe) EXPECT_EQ(a.predict(s), b.predict(s));
    }
    auto a = fit_logreg(xm, y), b = fit_logreg(xp, yp);
    EXPECT_NEAR(logreg_objective(a, xm, y), logreg_objective(b, xp, yp), 1e-6);
}

TEST(Fit, CnnPathUsesImagesAndIsDeterministic) {
    auto train = image_samples(8, 8, 60);
    LabelMatrix y = random_labels(8, 61);
    FitConfig cfg = quick_config();
    auto a = fit_model(ModelKind::cnn, FeatureSet::image, train, y, kNames3, cfg, 9);
    auto b = fit_model(ModelKind::cnn, FeatureSet::image, train, y, kNames3, cfg, 9);
    EXPECT_EQ(a.net.params(), b.net.params());
    EXPECT_EQ(a.prep.image_m, 8);
    EXPECT_EQ(a.net.outputs(), 3);
    Sample wrong;
    wrong.image = SparsityImage(4, 10);
    EXPECT_THROW(a.predict(wrong), ShapeError);
}

TEST(ImageRows, ScalesBytes) {
    SparsityImage img(2, 5);
    img.at(0, 1, 2) = 255;
    img.at(1, 0, 0) = 51;
    RowMatrix r = image_rows({&img});
    ASSERT_EQ(r.cols(), 12);
    EXPECT_DOUBLE_EQ(r(0, 5), 1.0);
    EXPECT_DOUBLE_EQ(r(0, 6), 0.2);
    EXPECT_DOUBLE_EQ(r.sum(), 1.2);
}

}  // namespace
}  // namespace precsel
