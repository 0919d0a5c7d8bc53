#include "precsel/eval/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>

#include "precsel/eval/metrics.hpp"

namespace precsel {
namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

LabelMatrix EvalCorpus::label_matrix(const std::vector<std::size_t>& rows) const {
    LabelMatrix y = LabelMatrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(label_names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int l : entries.at(rows[i]).optimal) y(static_cast<Eigen::Index>(i), l) = 1.0;
    return y;
}

std::vector<double> feature_vector(const ScalarFeatures& f) {
    const auto a = f.as_array();
    return {a.begin(), a.end()};
}

EvalCorpus build_corpus(const std::vector<LabelRecord>& records, const std::map<std::string, ScalarFeatures>& features,
                        const std::map<std::string, SparsityImage>& images, std::vector<PrecondKind> kinds) {
    if (kinds.empty()) {
        for (const auto& r : records)
            for (const auto& t : r.timings)
                if (std::find(kinds.begin(), kinds.end(), t.kind) == kinds.end()) kinds.push_back(t.kind);
        std::sort(kinds.begin(), kinds.end());
    }
    EvalCorpus c;
    for (PrecondKind k : kinds) c.label_names.emplace_back(to_string(k));
    for (const auto& r : records) {
        CorpusEntry e;
        e.matrix_id = r.matrix_id;
        auto f = features.find(r.matrix_id);
        if (f == features.end()) throw NotFoundError("no features for " + r.matrix_id);
        e.sample.scalar = feature_vector(f->second);
        if (!images.empty()) {
            auto im = images.find(r.matrix_id);
            if (im == images.end()) throw NotFoundError("no image for " + r.matrix_id);
            e.sample.image = im->second;
        }
        e.t_star = r.t_star;
        for (std::size_t l = 0; l < kinds.size(); ++l) {
            e.times.push_back(r.total_time(kinds[l]));
            if (r.is_optimal(kinds[l])) e.optimal.push_back(static_cast<int>(l));
        }
        c.entries.push_back(std::move(e));
    }
    return c;
}

std::uint64_t repetition_seed(std::uint64_t seed, int rep) { return mix(mix(seed) ^ static_cast<std::uint64_t>(rep)); }

std::vector<SplitPlan> make_split_plans(std::size_t n, int repetitions, std::uint64_t seed, double test_fraction) {
    const auto n_test = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n)));
    if (n_test == 0) throw DataError("corpus of " + std::to_string(n) + " matrices is too small for a test split");
    if (n - n_test < 2) throw DataError("split leaves fewer than two training matrices");
    std::vector<SplitPlan> plans;
    for (int rep = 1; rep <= repetitions; ++rep) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::mt19937_64 rng(repetition_seed(seed, rep));
        // Fisher-Yates with explicit bounds so plans do not depend on the library's shuffle.
        for (std::size_t i = n - 1; i > 0; --i) std::swap(idx[i], idx[rng() % (i + 1)]);
        SplitPlan p;
        p.seed = seed;
        p.repetition = rep;
        p.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
        p.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
        std::sort(p.test.begin(), p.test.end());
        std::sort(p.train.begin(), p.train.end());
        plans.push_back(std::move(p));
    }
    return plans;
}

void aggregate(EvalReport& r, double slow_threshold) {
    std::size_t acc1 = 0, slow = 0, sizes = 0;
    for (const auto& p : r.pairs) {
        acc1 += p.accuracy == 1.0;
        slow += p.slowdown < slow_threshold;
        sizes += p.pred.size();
    }
    const double n = static_cast<double>(r.pairs.size());
    r.p_acc1 = r.pairs.empty() ? 0.0 : static_cast<double>(acc1) / n;
    r.p_slow15 = r.pairs.empty() ? 0.0 : static_cast<double>(slow) / n;
    r.mean_pred_size = r.pairs.empty() ? 0.0 : static_cast<double>(sizes) / n;
}

std::vector<RepetitionSummary> per_repetition(const EvalReport& r, double slow_threshold) {
    std::map<int, EvalReport> by_rep;
    for (const auto& p : r.pairs) by_rep[p.repetition].pairs.push_back(p);
    std::vector<RepetitionSummary> out;
    for (auto& [rep, sub] : by_rep) {
        aggregate(sub, slow_threshold);
        out.push_back({rep, sub.p_acc1, sub.p_slow15, sub.mean_pred_size});
    }
    return out;
}

EvalReport evaluate_classifier(const EvalCorpus& corpus, const std::vector<SplitPlan>& plans, const std::string& name,
                               const Trainer& trainer, double slow_threshold) {
    EvalReport r;
    r.classifier = name;
    for (const auto& plan : plans) {
        Predictor predict = trainer(plan);
        for (std::size_t i : plan.test) {
            const CorpusEntry& e = corpus.entries.at(i);
            PairMetric m;
            m.repetition = plan.repetition;
            m.matrix_id = e.matrix_id;
            m.pred = predict(i);
            m.accuracy = accuracy(e.optimal, m.pred);
            m.slowdown = slowdown(m.pred, e.times, e.t_star);
            r.pairs.push_back(std::move(m));
        }
    }
    aggregate(r, slow_threshold);
    return r;
}

std::vector<EvalReport> run_experiment(const EvalCorpus& corpus, std::vector<ClassifierSpec> classifiers,
                                       const ExperimentConfig& cfg, std::uint64_t seed,
                                       const std::function<void(const std::string&, int)>& progress) {
    if (corpus.entries.empty()) throw DataError("empty corpus");
    const bool has_benchmark = std::any_of(classifiers.begin(), classifiers.end(),
                                           [](const ClassifierSpec& c) { return c.kind == ModelKind::benchmark; });
    if (!has_benchmark) classifiers.push_back({"benchmark", ModelKind::benchmark, FeatureSet::scalar});
    const auto plans = make_split_plans(corpus.entries.size(), cfg.repetitions, seed, cfg.test_fraction);

    std::vector<EvalReport> out;
    for (const auto& spec : classifiers) {
        Trainer trainer = [&](const SplitPlan& plan) -> Predictor {
            if (progress) progress(spec.name, plan.repetition);
            std::vector<Sample> x;
            for (std::size_t i : plan.train) x.push_back(corpus.entries[i].sample);
            auto model = std::make_shared<TrainedModel>(fit_model(spec.kind, spec.features, x, corpus.label_matrix(plan.train),
                                                                  corpus.label_names, cfg.fit,
                                                                  repetition_seed(seed, plan.repetition)));
            return [model, &corpus](std::size_t i) { return model->predict(corpus.entries[i].sample); };
        };
        out.push_back(evaluate_classifier(corpus, plans, spec.name, trainer, cfg.slow_threshold));
    }
    return out;
}

}  // namespace precsel
