#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "precsel/imgcodec/sparsity_image.hpp"
#include "precsel/mlkit/classifiers.hpp"
#include "precsel/mlkit/network.hpp"
#include "precsel/mlkit/preprocessing.hpp"

namespace precsel {

enum class ModelKind { knn, logreg, rforest, mlp, cnn, benchmark };
/// scalar: the nine features; image: the flattened image (PCA-reduced for
/// non-CNN models); extended: standardized scalars + PCA-reduced image.
enum class FeatureSet { scalar, image, extended };

std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);
std::string_view to_string(FeatureSet f);
FeatureSet parse_feature_set(std::string_view s);

/// One matrix as the classifiers see it. `image` is empty (m = 0) when the
/// feature set does not use it.
struct Sample {
    std::vector<double> scalar;
    SparsityImage image;
};

/// Sorted label indices.
using LabelSet = std::vector<int>;

inline constexpr int kModelFormatVersion = 1;

struct FitConfig {
    int knn_k = 5;
    LogRegOptions logreg;
    ForestOptions forest;
    int mlp_hidden = 128;
    TrainConfig train;    // CNN and MLP; seed is overridden by the fit seed
    CnnConfig cnn;        // m, in_channels and outputs are taken from the data
    double pca_variance = 0.99;
    double threshold = 0.5;
    std::optional<int> fallback;  // default: most frequent training label
};

struct Preprocessing {
    FeatureSet features = FeatureSet::scalar;
    MedianImputer imputer;
    Standardizer standardizer;
    std::optional<PcaBasis> pca;
    int image_m = 0;
    int scalar_dims = 0;

    /// Model-space feature vector for a non-CNN model.
    Eigen::VectorXd vector(const Sample& s) const;
};

class TrainedModel {
public:
    ModelKind kind = ModelKind::benchmark;
    std::vector<std::string> label_names;
    double threshold = 0.5;
    int fallback = 0;
    std::uint64_t seed = 0;
    Preprocessing prep;

    KnnParams knn;
    LogRegParams logreg;
    ForestParams forest;
    Network net;
    int benchmark_label = 0;

    int num_labels() const { return static_cast<int>(label_names.size()); }
    /// Per-label scores in [0, 1].
    Eigen::VectorXd scores(const Sample& s) const;
    /// Never empty: falls back to `fallback` when no label passes.
    LabelSet predict(const Sample& s) const;

    std::string to_json() const;
    static TrainedModel from_json(std::string_view text);
    void save(const std::filesystem::path& path) const;
    static TrainedModel load(const std::filesystem::path& path);
};

/// Threshold rule with the empty-set fallback.
LabelSet decide(const Eigen::VectorXd& scores, double threshold, int fallback);

/// Column with the most positives; ties go to the lowest index.
int most_frequent_label(const LabelMatrix& y);

/// Trains `kind` on `x` (one Sample per row of `y`). Deterministic under seed.
TrainedModel fit_model(ModelKind kind, FeatureSet features, const std::vector<Sample>& x, const LabelMatrix& y,
                       const std::vector<std::string>& label_names, const FitConfig& cfg, std::uint64_t seed);

/// Images as CNN input rows: bytes / 255 in (R, G, B) pixel order.
RowMatrix image_rows(const std::vector<const SparsityImage*>& images);

}  // namespace precsel
