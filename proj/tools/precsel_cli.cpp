// precsel: command-line front end for the preconditioner-selection pipeline.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "precsel/error.hpp"
#include "precsel/eval/report.hpp"
#include "precsel/features/scalar_features.hpp"
#include "precsel/imgcodec/sparsity_image.hpp"
#include "precsel/krylov/pcg.hpp"
#include "precsel/labelgen/labels.hpp"
#include "precsel/matio/fetch.hpp"
#include "precsel/matio/manifest.hpp"
#include "precsel/matio/matrix_market.hpp"
#include "precsel/mlkit/model.hpp"
#include "precsel/synth/generators.hpp"

namespace fs = std::filesystem;
using namespace precsel;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ','))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

/// Flat `key = value` file; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

fs::path image_path(const fs::path& dir, const std::string& id) {
    std::string name = id;
    std::replace(name.begin(), name.end(), '/', '_');
    return dir / (name + ".png");
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::vector<PrecondKind> parse_kinds(const std::string& list) {
    std::vector<PrecondKind> kinds;
    for (const auto& name : split_list(list)) kinds.push_back(parse_precond_kind(name));
    if (kinds.empty()) throw UsageError("empty preconditioner list");
    return kinds;
}

struct Globals {
    std::uint64_t seed = 0;
    std::string config;
    std::string cache_dir;
    bool quiet = false;
};

void note(const Globals& g, const std::string& msg) {
    if (!g.quiet) std::cerr << msg << '\n';
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
    int count = 60;
    std::string out;
};

int run_synth(const Globals& g, const SynthArgs& a) {
    ensure_dir(a.out);
    MatrixManifest manifest;
    for (const auto& pm : synth::planted_corpus(a.count, g.seed)) {
        const fs::path file = fs::path(a.out) / (pm.id + ".mtx");
        write_matrix_market(pm.matrix, file);
        manifest.upsert({pm.id, file.filename().string(), pm.matrix.n(), pm.matrix.nnz(), sha256_file(file)});
    }
    manifest.save(fs::path(a.out) / "manifest.csv");
    note(g, "wrote " + std::to_string(manifest.size()) + " matrices to " + a.out);
    return 0;
}

// ---- fetch -----------------------------------------------------------------

struct FetchArgs {
    std::string names;
    std::string list;
};

int run_fetch(const Globals& g, const FetchArgs& a) {
    std::vector<std::string> names = split_list(a.names);
    if (!a.list.empty()) {
        std::ifstream in(a.list);
        if (!in) throw IoError("cannot open " + a.list);
        for (std::string line; std::getline(in, line);)
            if (line = trim(line); !line.empty() && line[0] != '#') names.push_back(line);
    }
    if (names.empty()) throw UsageError("fetch needs --name or --list");
    const fs::path cache = resolve_cache_dir(g.cache_dir.empty() ? std::nullopt : std::optional(g.cache_dir));
    for (const auto& n : names) std::cout << fetch_matrix(n, cache).string() << '\n';
    return 0;
}

// ---- features --------------------------------------------------------------

struct FeaturesArgs {
    std::string manifest;
    std::string out;
    FeatureOptions opts;
};

int run_features(const Globals& g, const FeaturesArgs& a) {
    auto manifest = MatrixManifest::load(a.manifest);
    std::map<std::string, ScalarFeatures> table;
    for (const auto& e : manifest.entries()) {
        note(g, "features " + e.matrix_id);
        table[e.matrix_id] = compute_features(load_matrix(manifest.resolve(e)), a.opts);
    }
    write_feature_table(a.out, table);
    return 0;
}

// ---- encode ----------------------------------------------------------------

struct EncodeArgs {
    std::string manifest;
    std::string out;
    int m = 32;
    int n_min = -1, n_max = -1;
};

int run_encode(const Globals& g, const EncodeArgs& a) {
    auto manifest = MatrixManifest::load(a.manifest);
    if (manifest.size() == 0) throw DataError("manifest is empty");
    std::vector<std::pair<std::string, SparseMatrix>> mats;
    index_t lo = std::numeric_limits<index_t>::max(), hi = 0;
    for (const auto& e : manifest.entries()) {
        mats.emplace_back(e.matrix_id, load_matrix(manifest.resolve(e)));
        lo = std::min(lo, mats.back().second.n());
        hi = std::max(hi, mats.back().second.n());
    }
    const EncodingContext ctx{a.n_min >= 0 ? a.n_min : lo, a.n_max >= 0 ? a.n_max : hi};
    ensure_dir(a.out);
    for (const auto& [id, mat] : mats) write_png(encode_image(mat, a.m, ctx), image_path(a.out, id));
    note(g, "encoded " + std::to_string(mats.size()) + " images at m=" + std::to_string(a.m));
    return 0;
}

// ---- solve -----------------------------------------------------------------

struct SolveArgs {
    std::string matrix;
    std::string precond = "JACOBI";
    double rtol = 1e-8;
    int max_iter = -1;
    double time_limit = 60.0;
    std::string rhs = "random";
    PrecondOptions popts;
};

int run_solve(const Globals& g, const SolveArgs& a) {
    SparseMatrix mat = load_matrix(a.matrix);
    std::vector<double> b(mat.n(), 1.0), x_star;
    if (a.rhs == "random") {
        auto suite = generate_rhs_suite(mat, g.seed);
        b = suite.systems.front().b;
        x_star = suite.systems.front().x_star;
    } else if (a.rhs != "ones") {
        throw UsageError("--rhs must be 'ones' or 'random'");
    }
    const auto kind = parse_precond_kind(a.precond);
    const auto t0 = std::chrono::steady_clock::now();
    auto m = build_preconditioner(mat, kind, a.popts);
    const double setup = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    PcgOptions o;
    o.rtol = a.rtol;
    o.max_iter = a.max_iter;
    o.time_limit = a.time_limit;
    auto r = pcg_solve(mat, b, *m, o);
    std::printf("precond=%s n=%d nnz=%d iterations=%d converged=%s rel_residual=%.3e setup=%.6f solve=%.6f",
                std::string(to_string(kind)).c_str(), mat.n(), mat.nnz(), r.iterations, r.converged ? "yes" : "no",
                r.rel_residual, setup, r.wall_time);
    if (!x_star.empty()) std::printf(" rel_error=%.3e", relative_error(r.x, x_star));
    std::printf("\n");
    return r.converged ? 0 : 2;
}

// ---- label -----------------------------------------------------------------

struct LabelArgs {
    std::string manifest;
    std::string out;
    std::string kinds;
    TimingOptions opts;
};

std::string default_kinds() {
    std::string s;
    for (PrecondKind k : kLabelingKinds) s += (s.empty() ? "" : ",") + std::string(to_string(k));
    return s;
}

int run_label(const Globals& g, const LabelArgs& a) {
    auto manifest = MatrixManifest::load(a.manifest);
    auto ds = build_label_dataset(manifest, parse_kinds(a.kinds), g.seed, a.opts,
                                  [&](const std::string& id) { note(g, "label " + id); });
    write_label_records(a.out, ds.records);
    for (const auto& [id, why] : ds.failures) std::cerr << "unlabeled " << id << ": " << why << '\n';
    if (!g.quiet) {
        std::cerr << "labeled " << ds.records.size() << " matrices; mean |Y| = " << ds.stats.mean_optimal << '\n';
        for (const auto& [k, c] : ds.stats.optimal_count) std::cerr << "  " << to_string(k) << ": " << c << '\n';
    }
    return ds.records.empty() ? 2 : 0;
}

// ---- train / eval / predict -----------------------------------------------

struct DataArgs {
    std::string labels;
    std::string features;
    std::string images;
    std::string kinds;
};

struct ModelArgs {
    FitConfig fit;
    int epochs = 50;
    int batch = 16;
    double lr = 1e-3;
    std::string fallback;

    FitConfig config(const std::vector<std::string>& label_names) const {
        FitConfig f = fit;
        if (!fallback.empty()) {
            const std::string want(to_string(parse_precond_kind(fallback)));
            auto it = std::find(label_names.begin(), label_names.end(), want);
            if (it == label_names.end()) throw UsageError("fallback " + want + " is not a label column");
            f.fallback = static_cast<int>(it - label_names.begin());
        }
        f.train.epochs = epochs;
        f.train.batch = batch;
        f.train.lr = lr;
        return f;
    }
};

void add_model_options(CLI::App* cmd, ModelArgs& m) {
    cmd->add_option("--epochs", m.epochs, "CNN/MLP training epochs")->capture_default_str();
    cmd->add_option("--batch", m.batch, "CNN/MLP mini-batch size")->capture_default_str();
    cmd->add_option("--lr", m.lr, "CNN/MLP Adam step size")->capture_default_str();
    cmd->add_option("--knn-k", m.fit.knn_k, "neighbors for knn")->capture_default_str();
    cmd->add_option("--trees", m.fit.forest.trees, "trees for rforest")->capture_default_str();
    cmd->add_option("--lambda", m.fit.logreg.lambda, "L2 penalty for logreg")->capture_default_str();
    cmd->add_option("--pca-variance", m.fit.pca_variance, "retained PCA variance")->capture_default_str();
    cmd->add_option("--threshold", m.fit.threshold, "decision threshold on scores")->capture_default_str();
    cmd->add_option("--fallback", m.fallback, "label used when no score passes (default: most frequent)");
}

void add_data_options(CLI::App* cmd, DataArgs& d) {
    cmd->add_option("--labels", d.labels, "label records (JSONL)")->required();
    cmd->add_option("--features", d.features, "feature table (CSV)")->required();
    cmd->add_option("--images", d.images, "directory of encoded PNG images");
    cmd->add_option("--kinds", d.kinds, "label columns (default: every timed kind)");
}

EvalCorpus load_corpus(const DataArgs& d) {
    auto records = read_label_records(d.labels);
    auto feats = read_feature_table(d.features);
    std::map<std::string, SparsityImage> imgs;
    if (!d.images.empty())
        for (const auto& r : records) imgs[r.matrix_id] = read_png(image_path(d.images, r.matrix_id));
    return build_corpus(records, feats, imgs, d.kinds.empty() ? std::vector<PrecondKind>{} : parse_kinds(d.kinds));
}

ClassifierSpec parse_classifier(const std::string& text, int image_m) {
    // kind[:features]; cnn always uses images.
    const auto colon = text.find(':');
    ClassifierSpec s;
    s.kind = parse_model_kind(text.substr(0, colon));
    s.features = s.kind == ModelKind::cnn ? FeatureSet::image : FeatureSet::scalar;
    if (colon != std::string::npos) s.features = parse_feature_set(text.substr(colon + 1));
    if (s.kind == ModelKind::cnn)
        s.name = "cnn_" + std::to_string(image_m);
    else if (s.kind == ModelKind::benchmark || colon == std::string::npos)
        s.name = std::string(to_string(s.kind));
    else
        s.name = std::string(to_string(s.kind)) + "_" + std::string(to_string(s.features));
    return s;
}

void require_images(const EvalCorpus& c, const ClassifierSpec& s) {
    if (s.kind == ModelKind::benchmark || s.features == FeatureSet::scalar) return;
    for (const auto& e : c.entries)
        if (e.sample.image.m() == 0) throw UsageError(s.name + " needs --images");
}

struct TrainArgs {
    DataArgs data;
    ModelArgs model;
    std::string classifier = "cnn";
    std::string out;
};

int run_train(const Globals& g, const TrainArgs& a) {
    EvalCorpus c = load_corpus(a.data);
    const int m = c.entries.empty() ? 0 : c.entries.front().sample.image.m();
    ClassifierSpec spec = parse_classifier(a.classifier, m);
    require_images(c, spec);
    std::vector<std::size_t> all(c.entries.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::vector<Sample> x;
    for (const auto& e : c.entries) x.push_back(e.sample);
    note(g, "training " + spec.name + " on " + std::to_string(x.size()) + " matrices");
    auto model = fit_model(spec.kind, spec.features, x, c.label_matrix(all), c.label_names, a.model.config(c.label_names), g.seed);
    model.save(a.out);
    return 0;
}

struct PredictArgs {
    std::string model;
    std::string features;
    std::string images;
};

int run_predict(const Globals&, const PredictArgs& a) {
    auto model = TrainedModel::load(a.model);
    auto feats = read_feature_table(a.features);
    std::cout << "matrix_id,pred_set\n";
    for (const auto& [id, f] : feats) {
        Sample s{feature_vector(f), {}};
        if (!a.images.empty()) s.image = read_png(image_path(a.images, id));
        std::string pred;
        for (int l : model.predict(s)) pred += (pred.empty() ? "" : ";") + model.label_names.at(l);
        std::cout << id << ',' << pred << '\n';
    }
    return 0;
}

struct EvalArgs {
    DataArgs data;
    ModelArgs model;
    std::string classifiers = "cnn,benchmark";
    int repetitions = 30;
    double slow_threshold = 1.5;
    std::string out;
    bool no_svg = false;
};

int run_eval(const Globals& g, const EvalArgs& a) {
    EvalCorpus c = load_corpus(a.data);
    const int m = c.entries.empty() ? 0 : c.entries.front().sample.image.m();
    std::vector<ClassifierSpec> specs;
    for (const auto& t : split_list(a.classifiers)) {
        specs.push_back(parse_classifier(t, m));
        require_images(c, specs.back());
    }
    ExperimentConfig cfg;
    cfg.repetitions = a.repetitions;
    cfg.slow_threshold = a.slow_threshold;
    cfg.fit = a.model.config(c.label_names);
    auto reports = run_experiment(c, specs, cfg, g.seed, [&](const std::string& name, int rep) {
        note(g, name + " repetition " + std::to_string(rep) + "/" + std::to_string(a.repetitions));
    });
    emit_report(a.out, reports, c.label_names, a.slow_threshold, !a.no_svg);
    std::printf("%-16s %8s %8s %8s\n", "classifier", "p_acc1", "p_slow", "mean|Y|");
    for (const auto& r : reports) std::printf("%-16s %8.4f %8.4f %8.4f\n", r.classifier.c_str(), r.p_acc1, r.p_slow15, r.mean_pred_size);
    return 0;
}

struct ReportArgs {
    std::string metrics;
    std::string out;
    double slow_threshold = 1.5;
    bool no_svg = false;
};

int run_report(const Globals&, const ReportArgs& a) {
    std::vector<std::string> names;
    auto reports = read_metrics_csv(a.metrics, names, a.slow_threshold);
    ensure_dir(a.out);
    write_summary_csv(fs::path(a.out) / "summary.csv", reports);
    write_repetition_csv(fs::path(a.out) / "repetitions.csv", reports, a.slow_threshold);
    if (!a.no_svg) write_scatter_svg(fs::path(a.out) / "scatter.svg", reports);
    for (const auto& r : reports) std::printf("%s,%.6f,%.6f,%.6f\n", r.classifier.c_str(), r.p_acc1, r.p_slow15, r.mean_pred_size);
    return 0;
}

/// Expands `--config FILE` into leading `--key value` arguments for the chosen
/// subcommand so that explicit flags, which come later, take precedence.
std::vector<std::string> apply_config(CLI::App& app, std::vector<std::string> args) {
    auto it = std::find_if(args.begin(), args.end(), [](const std::string& s) { return s == "--config" || s.rfind("--config=", 0) == 0; });
    if (it == args.end()) return args;
    std::string path;
    if (*it == "--config") {
        if (std::next(it) == args.end()) throw UsageError("--config needs a file");
        path = *std::next(it);
    } else {
        path = it->substr(9);
    }
    auto entries = read_config(path);
    CLI::App* sub = nullptr;
    for (const auto& s : args)
        if (auto* c = [&]() -> CLI::App* { try { return app.get_subcommand(s); } catch (const CLI::OptionNotFound&) { return nullptr; } }()) {
            sub = c;
            break;
        }
    std::vector<std::string> global, local;
    for (const auto& [key, value] : entries) {
        const std::string flag = "--" + key;
        if (key == "config") continue;
        auto push = [&](std::vector<std::string>& v, const CLI::Option* o) {
            if (o->get_type_size() == 0) {
                if (value == "true" || value == "1" || value == "yes") v.push_back(flag);
            } else {
                v.push_back(flag);
                v.push_back(value);
            }
        };
        if (const auto* o = app.get_option_no_throw(flag)) {
            push(global, o);
        } else if (sub != nullptr) {
            if (const auto* so = sub->get_option_no_throw(flag)) push(local, so);
        }
    }
    // args[0] is the program; place globals before the subcommand and locals right after it.
    std::vector<std::string> out;
    out.push_back(args[0]);
    out.insert(out.end(), global.begin(), global.end());
    bool placed = sub == nullptr;
    for (std::size_t i = 1; i < args.size(); ++i) {
        out.push_back(args[i]);
        if (!placed && args[i] == sub->get_name()) {
            out.insert(out.end(), local.begin(), local.end());
            placed = true;
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Preconditioner selection from sparse-matrix features and images"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "random seed")->capture_default_str();
    app.add_option("--config", g.config, "flat key=value config file; flags win");
    app.add_option("--cache-dir", g.cache_dir, "matrix download cache");
    app.add_flag("--quiet,-q", g.quiet, "suppress progress output");

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "write the planted two-family synthetic corpus");
    c_synth->add_option("--count", synth.count, "number of matrices")->capture_default_str();
    c_synth->add_option("--out", synth.out, "output directory")->required();

    FetchArgs fetch;
    auto* c_fetch = app.add_subcommand("fetch", "download SuiteSparse matrices into the cache");
    c_fetch->add_option("--name", fetch.names, "comma-separated Group/Name list");
    c_fetch->add_option("--list", fetch.list, "file with one Group/Name per line");

    FeaturesArgs feat;
    auto* c_feat = app.add_subcommand("features", "compute scalar features for a manifest");
    c_feat->add_option("--manifest", feat.manifest, "matrix manifest CSV")->required();
    c_feat->add_option("--out", feat.out, "feature table CSV")->required();
    c_feat->add_option("--eig-tol", feat.opts.eig_tol, "eigenvalue estimator tolerance")->capture_default_str();
    c_feat->add_option("--eig-max-iter", feat.opts.eig_max_iter, "eigenvalue estimator iteration cap")->capture_default_str();

    EncodeArgs enc;
    auto* c_enc = app.add_subcommand("encode", "encode matrices as m x m RGB sparsity images");
    c_enc->add_option("--manifest", enc.manifest, "matrix manifest CSV")->required();
    c_enc->add_option("--out", enc.out, "output image directory")->required();
    c_enc->add_option("--m", enc.m, "image resolution")->capture_default_str();
    c_enc->add_option("--n-min", enc.n_min, "smallest order in the data set (default: from manifest)");
    c_enc->add_option("--n-max", enc.n_max, "largest order in the data set (default: from manifest)");

    SolveArgs solve;
    auto* c_solve = app.add_subcommand("solve", "run one preconditioned CG solve");
    c_solve->add_option("--matrix", solve.matrix, "Matrix Market file")->required();
    c_solve->add_option("--precond", solve.precond, "preconditioner kind")->capture_default_str();
    c_solve->add_option("--rtol", solve.rtol, "relative residual tolerance")->capture_default_str();
    c_solve->add_option("--max-iter", solve.max_iter, "iteration cap (default 10 n)");
    c_solve->add_option("--time-limit", solve.time_limit, "seconds")->capture_default_str();
    c_solve->add_option("--rhs", solve.rhs, "ones | random")->capture_default_str();
    c_solve->add_option("--omega", solve.popts.omega, "SOR/SSOR relaxation")->capture_default_str();
    c_solve->add_option("--block-size", solve.popts.pbjacobi_block_size, "PBJACOBI block size")->capture_default_str();
    c_solve->add_option("--blocks", solve.popts.bjacobi_blocks, "BJACOBI block count")->capture_default_str();

    LabelArgs lab;
    lab.kinds = default_kinds();
    auto* c_lab = app.add_subcommand("label", "time every preconditioner and write optimal sets");
    c_lab->add_option("--manifest", lab.manifest, "matrix manifest CSV")->required();
    c_lab->add_option("--out", lab.out, "label records JSONL")->required();
    c_lab->add_option("--kinds", lab.kinds, "comma-separated preconditioner kinds")->capture_default_str();
    c_lab->add_option("--time-limit", lab.opts.time_limit, "seconds per matrix/preconditioner pair")->capture_default_str();
    c_lab->add_option("--reps", lab.opts.reps, "timed repetitions per system")->capture_default_str();
    c_lab->add_option("--rtol", lab.opts.solver.rtol, "solver tolerance")->capture_default_str();

    TrainArgs train;
    auto* c_train = app.add_subcommand("train", "fit one classifier on the whole corpus");
    add_data_options(c_train, train.data);
    add_model_options(c_train, train.model);
    c_train->add_option("--classifier", train.classifier, "kind[:features]")->capture_default_str();
    c_train->add_option("--out", train.out, "model file")->required();

    PredictArgs pred;
    auto* c_pred = app.add_subcommand("predict", "predict optimal sets with a saved model");
    c_pred->add_option("--model", pred.model, "model file")->required();
    c_pred->add_option("--features", pred.features, "feature table CSV")->required();
    c_pred->add_option("--images", pred.images, "directory of encoded PNG images");

    EvalArgs ev;
    auto* c_eval = app.add_subcommand("eval", "repeated 80/20 evaluation of classifiers");
    add_data_options(c_eval, ev.data);
    add_model_options(c_eval, ev.model);
    c_eval->add_option("--classifiers", ev.classifiers, "comma-separated kind[:features] list")->capture_default_str();
    c_eval->add_option("--repetitions", ev.repetitions, "number of splits")->capture_default_str();
    c_eval->add_option("--slow-threshold", ev.slow_threshold, "acceptable slowdown")->capture_default_str();
    c_eval->add_option("--out", ev.out, "report directory")->required();
    c_eval->add_flag("--no-svg", ev.no_svg, "skip the scatter plot");

    ReportArgs rep;
    auto* c_rep = app.add_subcommand("report", "recompute summaries from a metrics CSV");
    c_rep->add_option("--metrics", rep.metrics, "per-pair metrics CSV")->required();
    c_rep->add_option("--out", rep.out, "output directory")->required();
    c_rep->add_option("--slow-threshold", rep.slow_threshold, "acceptable slowdown")->capture_default_str();
    c_rep->add_flag("--no-svg", rep.no_svg, "skip the scatter plot");

    try {
        std::vector<std::string> args(argv, argv + argc);
        args = apply_config(app, args);
        std::vector<std::string> rev(args.rbegin(), std::prev(args.rend()));
        app.parse(rev);

        if (*c_synth) return run_synth(g, synth);
        if (*c_fetch) return run_fetch(g, fetch);
        if (*c_feat) return run_features(g, feat);
        if (*c_enc) return run_encode(g, enc);
        if (*c_solve) return run_solve(g, solve);
        if (*c_lab) return run_label(g, lab);
        if (*c_train) return run_train(g, train);
        if (*c_pred) return run_predict(g, pred);
        if (*c_eval) return run_eval(g, ev);
        if (*c_rep) return run_report(g, rep);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}
