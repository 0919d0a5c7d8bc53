#include "precsel/mlkit/model.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "precsel/error.hpp"

namespace precsel {
namespace {

using json = nlohmann::json;

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

json matrix_json(const Eigen::Ref<const RowMatrix>& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

RowMatrix matrix_from(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>(), cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw ParseError("matrix payload size mismatch");
    RowMatrix m(rows, cols);
    std::copy(data.begin(), data.end(), m.data());
    return m;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const json& j) {
    const auto data = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(data.data(), static_cast<Eigen::Index>(data.size()));
}

RowMatrix scalar_rows(const std::vector<Sample>& x) {
    const std::size_t d = x.front().scalar.size();
    RowMatrix m(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].scalar.size() != d) throw ShapeError("scalar feature vectors differ in length");
        for (std::size_t j = 0; j < d; ++j) m(i, j) = x[i].scalar[j];
    }
    return m;
}

RowMatrix flat_rows(const std::vector<Sample>& x) {
    const int m = x.front().image.m();
    RowMatrix out(static_cast<Eigen::Index>(x.size()), 3 * m * m);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].image.m() != m) throw ShapeError("images differ in resolution");
        const auto& px = x[i].image.pixels();
        for (std::size_t k = 0; k < px.size(); ++k) out(i, k) = px[k];
    }
    return out;
}

bool uses_scalars(FeatureSet f) { return f != FeatureSet::image; }
bool uses_images(FeatureSet f) { return f != FeatureSet::scalar; }

}  // namespace

std::string_view to_string(ModelKind k) {
    switch (k) {
        case ModelKind::knn: return "knn";
        case ModelKind::logreg: return "logreg";
        case ModelKind::rforest: return "rforest";
        case ModelKind::mlp: return "mlp";
        case ModelKind::cnn: return "cnn";
        case ModelKind::benchmark: return "benchmark";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view s) {
    const std::string l = lower(s);
    for (ModelKind k : {ModelKind::knn, ModelKind::logreg, ModelKind::rforest, ModelKind::mlp, ModelKind::cnn,
                        ModelKind::benchmark})
        if (l == to_string(k)) return k;
    throw DataError("unknown classifier '" + std::string(s) + "'");
}

std::string_view to_string(FeatureSet f) {
    switch (f) {
        case FeatureSet::scalar: return "scalar";
        case FeatureSet::image: return "image";
        case FeatureSet::extended: return "extended";
    }
    return "?";
}

FeatureSet parse_feature_set(std::string_view s) {
    const std::string l = lower(s);
    for (FeatureSet f : {FeatureSet::scalar, FeatureSet::image, FeatureSet::extended})
        if (l == to_string(f)) return f;
    throw DataError("unknown feature set '" + std::string(s) + "'");
}

Eigen::VectorXd Preprocessing::vector(const Sample& s) const {
    Eigen::VectorXd sc, im;
    if (uses_scalars(features)) {
        if (static_cast<int>(s.scalar.size()) != scalar_dims) throw ShapeError("scalar feature dimension mismatch");
        Eigen::VectorXd raw = Eigen::Map<const Eigen::VectorXd>(s.scalar.data(), scalar_dims);
        sc = standardizer.apply(imputer.apply(raw));
    }
    if (uses_images(features)) {
        if (s.image.m() != image_m) throw ShapeError("image resolution mismatch");
        const auto& px = s.image.pixels();
        Eigen::VectorXd flat(static_cast<Eigen::Index>(px.size()));
        for (std::size_t k = 0; k < px.size(); ++k) flat(k) = px[k];
        im = pca->apply(flat);
    }
    Eigen::VectorXd out(sc.size() + im.size());
    out << sc, im;
    return out;
}

RowMatrix image_rows(const std::vector<const SparsityImage*>& images) {
    if (images.empty()) return {};
    const int m = images.front()->m();
    RowMatrix out(static_cast<Eigen::Index>(images.size()), 3 * m * m);
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (images[i]->m() != m) throw ShapeError("images differ in resolution");
        const auto& px = images[i]->pixels();
        for (std::size_t k = 0; k < px.size(); ++k) out(i, k) = px[k] / 255.0;
    }
    return out;
}

LabelSet decide(const Eigen::VectorXd& scores, double threshold, int fallback) {
    LabelSet out;
    for (Eigen::Index l = 0; l < scores.size(); ++l)
        if (scores(l) >= threshold) out.push_back(static_cast<int>(l));
    if (out.empty()) out.push_back(fallback);
    return out;
}

int most_frequent_label(const LabelMatrix& y) {
    if (y.cols() == 0) throw ContractError("label matrix has no columns");
    Eigen::Index best;
    y.colwise().sum().maxCoeff(&best);
    return static_cast<int>(best);
}

Eigen::VectorXd TrainedModel::scores(const Sample& s) const {
    switch (kind) {
        case ModelKind::benchmark: {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(num_labels());
            v(benchmark_label) = 1.0;
            return v;
        }
        case ModelKind::knn: {
            const double k = static_cast<double>(std::min<Eigen::Index>(knn.k, knn.x.rows()));
            return knn_label_counts(knn, prep.vector(s)).cast<double>() / k;
        }
        case ModelKind::logreg: return logreg_scores(logreg, prep.vector(s));
        case ModelKind::rforest: return forest_scores(forest, prep.vector(s));
        case ModelKind::mlp: {
            Eigen::VectorXd v = prep.vector(s);
            RowMatrix row = Eigen::Map<const RowMatrix>(v.data(), 1, v.size());
            return net.scores(row).row(0).transpose();
        }
        case ModelKind::cnn: {
            if (s.image.m() != prep.image_m) throw ShapeError("image resolution mismatch");
            return net.scores(image_rows({&s.image})).row(0).transpose();
        }
    }
    throw ContractError("unhandled model kind");
}

LabelSet TrainedModel::predict(const Sample& s) const {
    if (kind == ModelKind::benchmark) return {benchmark_label};
    if (kind == ModelKind::knn) {
        const Eigen::VectorXi counts = knn_label_counts(knn, prep.vector(s));
        const Eigen::Index k = std::min<Eigen::Index>(knn.k, knn.x.rows());
        LabelSet out;
        for (Eigen::Index l = 0; l < counts.size(); ++l)
            if (2 * counts(l) > k) out.push_back(static_cast<int>(l));
        if (out.empty()) out.push_back(fallback);
        return out;
    }
    return decide(scores(s), threshold, fallback);
}

TrainedModel fit_model(ModelKind kind, FeatureSet features, const std::vector<Sample>& x, const LabelMatrix& y,
                       const std::vector<std::string>& label_names, const FitConfig& cfg, std::uint64_t seed) {
    if (static_cast<Eigen::Index>(x.size()) != y.rows()) throw ShapeError("sample and label counts differ");
    if (x.size() < 2) throw ContractError("fit needs at least 2 samples");
    if (y.cols() != static_cast<Eigen::Index>(label_names.size())) throw ShapeError("label names do not match labels");
    if (y.cols() == 0 || y.sum() <= 0.0) throw DataError("label matrix has no positive entries");

    TrainedModel model;
    model.kind = kind;
    model.label_names = label_names;
    model.threshold = cfg.threshold;
    model.seed = seed;
    model.fallback = cfg.fallback.value_or(most_frequent_label(y));
    if (model.fallback < 0 || model.fallback >= y.cols()) throw DataError("fallback label out of range");

    if (kind == ModelKind::benchmark) {
        model.benchmark_label = most_frequent_label(y);
        return model;
    }
    if (kind == ModelKind::cnn) {
        CnnConfig cc = cfg.cnn;
        cc.m = x.front().image.m();
        cc.in_channels = 3;
        cc.outputs = static_cast<int>(y.cols());
        model.prep.features = FeatureSet::image;
        model.prep.image_m = cc.m;
        std::vector<const SparsityImage*> imgs;
        for (const auto& s : x) imgs.push_back(&s.image);
        RowMatrix xi = image_rows(imgs);
        model.net = make_cnn(cc);
        model.net.init(seed);
        TrainConfig tc = cfg.train;
        tc.seed = seed ^ 0x5bd1e995ULL;
        train_network(model.net, xi, y, tc);
        return model;
    }

    Preprocessing& p = model.prep;
    p.features = features;
    if (uses_scalars(features)) {
        RowMatrix s = scalar_rows(x);
        p.scalar_dims = static_cast<int>(s.cols());
        p.imputer = MedianImputer::fit(s);
        p.standardizer = Standardizer::fit(p.imputer.apply(s));
    }
    if (uses_images(features)) {
        p.image_m = x.front().image.m();
        if (p.image_m == 0) throw ShapeError("feature set needs images");
        p.pca = pca_fit(flat_rows(x), cfg.pca_variance);
    }
    RowMatrix xm(static_cast<Eigen::Index>(x.size()), p.vector(x.front()).size());
    for (std::size_t i = 0; i < x.size(); ++i) xm.row(i) = p.vector(x[i]).transpose();

    switch (kind) {
        case ModelKind::knn: model.knn = fit_knn(xm, y, cfg.knn_k); break;
        case ModelKind::logreg: model.logreg = fit_logreg(xm, y, cfg.logreg); break;
        case ModelKind::rforest: model.forest = fit_forest(xm, y, cfg.forest, seed); break;
        case ModelKind::mlp: {
            model.net = make_mlp(static_cast<int>(xm.cols()), cfg.mlp_hidden, static_cast<int>(y.cols()));
            model.net.init(seed);
            TrainConfig tc = cfg.train;
            tc.seed = seed ^ 0x5bd1e995ULL;
            train_network(model.net, xm, y, tc);
            break;
        }
        default: throw ContractError("unhandled model kind");
    }
    return model;
}

std::string TrainedModel::to_json() const {
    json j;
    j["format"] = "precsel-model";
    j["version"] = kModelFormatVersion;
    j["kind"] = std::string(to_string(kind));
    j["label_names"] = label_names;
    j["threshold"] = threshold;
    j["fallback"] = fallback;
    j["seed"] = seed;

    json pj;
    pj["features"] = std::string(to_string(prep.features));
    pj["image_m"] = prep.image_m;
    pj["scalar_dims"] = prep.scalar_dims;
    if (prep.scalar_dims > 0) {
        pj["impute_median"] = vector_json(prep.imputer.median);
        pj["standardize_mean"] = vector_json(prep.standardizer.mean);
        pj["standardize_scale"] = vector_json(prep.standardizer.scale);
    }
    if (prep.pca) {
        pj["pca"] = {{"mean", vector_json(prep.pca->mean)},
                     {"components", matrix_json(RowMatrix(prep.pca->components))},
                     {"explained_ratio", vector_json(prep.pca->explained_ratio)},
                     {"retained", prep.pca->retained}};
    }
    j["preprocessing"] = pj;

    json params;
    switch (kind) {
        case ModelKind::benchmark: params["label"] = benchmark_label; break;
        case ModelKind::knn: params = {{"k", knn.k}, {"x", matrix_json(knn.x)}, {"y", matrix_json(knn.y)}}; break;
        case ModelKind::logreg:
            params = {{"lambda", logreg.lambda}, {"w", matrix_json(RowMatrix(logreg.w))}, {"b", vector_json(logreg.b)}};
            break;
        case ModelKind::rforest: {
            json labels = json::array();
            for (const auto& trees : forest.trees) {
                json arr = json::array();
                for (const auto& t : trees) {
                    std::vector<int> f, l, r;
                    std::vector<double> thr, val;
                    for (const auto& n : t.nodes) {
                        f.push_back(n.feature);
                        l.push_back(n.left);
                        r.push_back(n.right);
                        thr.push_back(n.threshold);
                        val.push_back(n.value);
                    }
                    arr.push_back({{"feature", f}, {"threshold", thr}, {"left", l}, {"right", r}, {"value", val}});
                }
                labels.push_back(std::move(arr));
            }
            params["trees"] = std::move(labels);
            break;
        }
        case ModelKind::mlp:
        case ModelKind::cnn: {
            const Shape& in = net.input_shape();
            json layers = json::array();
            for (const auto& s : net.specs()) layers.push_back({{"kind", s.kind}, {"arg", s.arg}});
            params = {{"input", {in.h, in.w, in.c}}, {"layers", layers}, {"weights", net.params()}};
            break;
        }
    }
    j["params"] = std::move(params);
    return j.dump();
}

TrainedModel TrainedModel::from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        if (j.value("format", "") != "precsel-model") throw ParseError("not a model file");
        const int version = j.at("version").get<int>();
        if (version != kModelFormatVersion)
            throw UnsupportedFormat("model format version " + std::to_string(version) + " is not supported");
        TrainedModel m;
        m.kind = parse_model_kind(j.at("kind").get<std::string>());
        m.label_names = j.at("label_names").get<std::vector<std::string>>();
        m.threshold = j.at("threshold").get<double>();
        m.fallback = j.at("fallback").get<int>();
        m.seed = j.at("seed").get<std::uint64_t>();

        const json& pj = j.at("preprocessing");
        m.prep.features = parse_feature_set(pj.at("features").get<std::string>());
        m.prep.image_m = pj.at("image_m").get<int>();
        m.prep.scalar_dims = pj.at("scalar_dims").get<int>();
        if (m.prep.scalar_dims > 0) {
            m.prep.imputer.median = vector_from(pj.at("impute_median"));
            m.prep.standardizer.mean = vector_from(pj.at("standardize_mean"));
            m.prep.standardizer.scale = vector_from(pj.at("standardize_scale"));
        }
        if (pj.contains("pca")) {
            PcaBasis b;
            b.mean = vector_from(pj["pca"].at("mean"));
            b.components = matrix_from(pj["pca"].at("components"));
            b.explained_ratio = vector_from(pj["pca"].at("explained_ratio"));
            b.retained = pj["pca"].at("retained").get<int>();
            m.prep.pca = std::move(b);
        }

        const json& params = j.at("params");
        switch (m.kind) {
            case ModelKind::benchmark: m.benchmark_label = params.at("label").get<int>(); break;
            case ModelKind::knn:
                m.knn.k = params.at("k").get<int>();
                m.knn.x = matrix_from(params.at("x"));
                m.knn.y = matrix_from(params.at("y"));
                break;
            case ModelKind::logreg:
                m.logreg.lambda = params.at("lambda").get<double>();
                m.logreg.w = matrix_from(params.at("w"));
                m.logreg.b = vector_from(params.at("b"));
                break;
            case ModelKind::rforest:
                for (const auto& label : params.at("trees")) {
                    std::vector<DecisionTree> trees;
                    for (const auto& t : label) {
                        auto f = t.at("feature").get<std::vector<int>>(), l = t.at("left").get<std::vector<int>>(),
                             r = t.at("right").get<std::vector<int>>();
                        auto thr = t.at("threshold").get<std::vector<double>>(),
                             val = t.at("value").get<std::vector<double>>();
                        DecisionTree tree;
                        for (std::size_t k = 0; k < f.size(); ++k) tree.nodes.push_back({f[k], thr[k], l[k], r[k], val[k]});
                        trees.push_back(std::move(tree));
                    }
                    m.forest.trees.push_back(std::move(trees));
                }
                break;
            case ModelKind::mlp:
            case ModelKind::cnn: {
                const auto in = params.at("input").get<std::vector<int>>();
                if (in.size() != 3) throw ParseError("network input shape must have 3 entries");
                std::vector<Network::LayerSpec> specs;
                for (const auto& l : params.at("layers")) specs.push_back({l.at("kind").get<std::string>(), l.at("arg").get<double>()});
                m.net = Network({in[0], in[1], in[2]}, std::move(specs));
                auto w = params.at("weights").get<std::vector<double>>();
                if (w.size() != m.net.param_count()) throw ParseError("network weight count mismatch");
                m.net.params().assign(w.begin(), w.end());
                break;
            }
        }
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed model file: ") + e.what());
    }
}

void TrainedModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json() << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

}  // namespace precsel
