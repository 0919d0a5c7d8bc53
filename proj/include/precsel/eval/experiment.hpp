#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "precsel/features/scalar_features.hpp"
#include "precsel/labelgen/labels.hpp"
#include "precsel/mlkit/model.hpp"

namespace precsel {

struct CorpusEntry {
    std::string matrix_id;
    Sample sample;
    LabelSet optimal;
    std::vector<double> times;  // per label, +inf when infeasible
    double t_star = 0.0;
};

struct EvalCorpus {
    std::vector<std::string> label_names;
    std::vector<CorpusEntry> entries;

    LabelMatrix label_matrix(const std::vector<std::size_t>& rows) const;
};

/// Joins label records with features and images by matrix id. Label columns
/// are `kinds` in the given order, or every kind timed in the records when
/// empty. Records without features (or without an image when `images` is
/// nonempty) raise NotFoundError.
EvalCorpus build_corpus(const std::vector<LabelRecord>& records, const std::map<std::string, ScalarFeatures>& features,
                        const std::map<std::string, SparsityImage>& images, std::vector<PrecondKind> kinds = {});

/// The nine features in table order, NaN for missing estimates.
std::vector<double> feature_vector(const ScalarFeatures& f);

struct SplitPlan {
    std::uint64_t seed = 0;
    int repetition = 1;  // 1-based
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// `repetitions` seeded random splits of [0, n). The test part has
/// floor(test_fraction * n) elements; throws DataError when that is zero or
/// leaves fewer than two training rows. Index lists are sorted.
std::vector<SplitPlan> make_split_plans(std::size_t n, int repetitions, std::uint64_t seed, double test_fraction = 0.2);

struct PairMetric {
    int repetition = 1;
    std::string matrix_id;
    double accuracy = 0.0;
    double slowdown = 0.0;
    LabelSet pred;
};

struct EvalReport {
    std::string classifier;
    std::vector<PairMetric> pairs;
    double p_acc1 = 0.0;
    double p_slow15 = 0.0;
    double mean_pred_size = 0.0;
};

/// Pools all pairs: p_acc1 = freq(accuracy == 1), p_slow = freq(slowdown <
/// slow_threshold), mean_pred_size = mean |Ŷ|.
void aggregate(EvalReport& r, double slow_threshold = 1.5);

struct RepetitionSummary {
    int repetition = 1;
    double p_acc1 = 0.0;
    double p_slow15 = 0.0;
    double mean_pred_size = 0.0;
};
std::vector<RepetitionSummary> per_repetition(const EvalReport& r, double slow_threshold = 1.5);

struct ClassifierSpec {
    std::string name;  // report label, e.g. "cnn_32"
    ModelKind kind = ModelKind::benchmark;
    FeatureSet features = FeatureSet::scalar;
};

/// Fitted predictor for one split: maps a corpus index to a label set.
using Predictor = std::function<LabelSet(std::size_t)>;
using Trainer = std::function<Predictor(const SplitPlan&)>;

EvalReport evaluate_classifier(const EvalCorpus& corpus, const std::vector<SplitPlan>& plans, const std::string& name,
                               const Trainer& trainer, double slow_threshold = 1.5);

struct ExperimentConfig {
    int repetitions = 30;
    double test_fraction = 0.2;
    double slow_threshold = 1.5;
    FitConfig fit;
};

/// Seed used to fit repetition `rep` under experiment seed `seed`.
std::uint64_t repetition_seed(std::uint64_t seed, int rep);

/// Runs every classifier over the same split plans. A benchmark entry is
/// appended when none is requested.
std::vector<EvalReport> run_experiment(const EvalCorpus& corpus, std::vector<ClassifierSpec> classifiers,
                                       const ExperimentConfig& cfg, std::uint64_t seed,
                                       const std::function<void(const std::string&, int)>& progress = {});

}  // namespace precsel
