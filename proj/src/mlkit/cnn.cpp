#include <algorithm>
#include <cmath>
#include <numeric>

#include "precsel/mlkit/network.hpp"

namespace precsel {
namespace {

using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

void he_normal(std::span<double> w, int fan_in, std::mt19937_64& rng) {
    std::normal_distribution<double> d(0.0, std::sqrt(2.0 / fan_in));
    for (double& v : w) v = d(rng);
}

class Conv3x3 final : public Layer {
public:
    explicit Conv3x3(int out) : out_(out) {}
    std::string name() const override { return "conv3x3"; }
    Shape output_shape(const Shape& in) const override { return {in.h, in.w, out_}; }
    std::size_t param_count(const Shape& in) const override { return static_cast<std::size_t>(9 * in.c + 1) * out_; }

    void init(const Shape& in, std::span<double> p, std::mt19937_64& rng) const override {
        const std::size_t nw = static_cast<std::size_t>(9) * in.c * out_;
        he_normal(p.first(nw), 9 * in.c, rng);
        std::fill(p.begin() + nw, p.end(), 0.0);
    }

    void forward(const Shape& s, std::span<const double> p, const RowMatrix& in, RowMatrix& out, LayerCache& cache,
                 bool, std::mt19937_64*) const override {
        const Eigen::Index batch = in.rows(), hw = s.h * s.w, k = 9 * s.c;
        RowMatrix& col = cache.aux;
        col.setZero(batch * hw, k);
        for (Eigen::Index b = 0; b < batch; ++b) {
            const double* src = in.row(b).data();
            for (int y = 0; y < s.h; ++y)
                for (int x = 0; x < s.w; ++x) {
                    double* dst = col.row(b * hw + y * s.w + x).data();
                    for (int ky = 0; ky < 3; ++ky) {
                        const int yy = y + ky - 1;
                        if (yy < 0 || yy >= s.h) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int xx = x + kx - 1;
                            if (xx < 0 || xx >= s.w) continue;
                            std::copy_n(src + (static_cast<std::size_t>(yy) * s.w + xx) * s.c, s.c,
                                        dst + (ky * 3 + kx) * s.c);
                        }
                    }
                }
        }
        ConstMap w(p.data(), k, out_);
        Eigen::Map<const Eigen::RowVectorXd> bias(p.data() + k * out_, out_);
        out.resize(batch, hw * out_);
        MutMap o(out.data(), batch * hw, out_);
        o.noalias() = col * w;
        o.rowwise() += bias;
    }

    void backward(const Shape& s, std::span<const double> p, const RowMatrix& in, const RowMatrix&,
                  const RowMatrix& dout, RowMatrix& din, std::span<double> grad, const LayerCache& cache) const override {
        const Eigen::Index batch = in.rows(), hw = s.h * s.w, k = 9 * s.c;
        const RowMatrix& col = cache.aux;
        ConstMap d(dout.data(), batch * hw, out_);
        ConstMap w(p.data(), k, out_);
        MutMap gw(grad.data(), k, out_);
        Eigen::Map<Eigen::RowVectorXd> gb(grad.data() + k * out_, out_);
        gw.noalias() += col.transpose() * d;
        gb += d.colwise().sum();
        RowMatrix dcol = d * w.transpose();
        din.setZero(batch, in.cols());
        for (Eigen::Index b = 0; b < batch; ++b) {
            double* dst = din.row(b).data();
            for (int y = 0; y < s.h; ++y)
                for (int x = 0; x < s.w; ++x) {
                    const double* src = dcol.row(b * hw + y * s.w + x).data();
                    for (int ky = 0; ky < 3; ++ky) {
                        const int yy = y + ky - 1;
                        if (yy < 0 || yy >= s.h) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int xx = x + kx - 1;
                            if (xx < 0 || xx >= s.w) continue;
                            double* t = dst + (static_cast<std::size_t>(yy) * s.w + xx) * s.c;
                            const double* f = src + (ky * 3 + kx) * s.c;
                            for (int c = 0; c < s.c; ++c) t[c] += f[c];
                        }
                    }
                }
        }
    }

private:
    int out_;
};

class Relu final : public Layer {
public:
    std::string name() const override { return "relu"; }
    Shape output_shape(const Shape& in) const override { return in; }
    void forward(const Shape&, std::span<const double>, const RowMatrix& in, RowMatrix& out, LayerCache&, bool,
                 std::mt19937_64*) const override {
        out = in.cwiseMax(0.0);
    }
    void backward(const Shape&, std::span<const double>, const RowMatrix& in, const RowMatrix&, const RowMatrix& dout,
                  RowMatrix& din, std::span<double>, const LayerCache&) const override {
        din = (in.array() > 0.0).select(dout, 0.0);
    }
};

class MaxPool2 final : public Layer {
public:
    std::string name() const override { return "maxpool2"; }
    Shape output_shape(const Shape& in) const override {
        if (in.h % 2 || in.w % 2) throw ShapeError("maxpool2 needs even height and width, got " + to_string(in));
        return {in.h / 2, in.w / 2, in.c};
    }
    void forward(const Shape& s, std::span<const double>, const RowMatrix& in, RowMatrix& out, LayerCache& cache,
                 bool, std::mt19937_64*) const override {
        const Shape o = output_shape(s);
        const Eigen::Index batch = in.rows();
        out.resize(batch, o.size());
        cache.index.resize(static_cast<std::size_t>(batch) * o.size());
        for (Eigen::Index b = 0; b < batch; ++b) {
            const double* src = in.row(b).data();
            double* dst = out.row(b).data();
            int* idx = cache.index.data() + b * o.size();
            for (int y = 0; y < o.h; ++y)
                for (int x = 0; x < o.w; ++x)
                    for (int c = 0; c < s.c; ++c) {
                        int best = ((2 * y) * s.w + 2 * x) * s.c + c;
                        for (int dy = 0; dy < 2; ++dy)
                            for (int dx = 0; dx < 2; ++dx) {
                                const int i = ((2 * y + dy) * s.w + 2 * x + dx) * s.c + c;
                                if (src[i] > src[best]) best = i;
                            }
                        const int oi = (y * o.w + x) * s.c + c;
                        dst[oi] = src[best];
                        idx[oi] = best;
                    }
        }
    }
    void backward(const Shape& s, std::span<const double>, const RowMatrix& in, const RowMatrix&, const RowMatrix& dout,
                  RowMatrix& din, std::span<double>, const LayerCache& cache) const override {
        const int osize = output_shape(s).size();
        din.setZero(in.rows(), in.cols());
        for (Eigen::Index b = 0; b < in.rows(); ++b) {
            const int* idx = cache.index.data() + b * osize;
            for (int o = 0; o < osize; ++o) din(b, idx[o]) += dout(b, o);
        }
    }
};

class Dense final : public Layer {
public:
    explicit Dense(int out) : out_(out) {}
    std::string name() const override { return "dense"; }
    Shape output_shape(const Shape&) const override { return {1, 1, out_}; }
    std::size_t param_count(const Shape& in) const override { return static_cast<std::size_t>(in.size() + 1) * out_; }
    void init(const Shape& in, std::span<double> p, std::mt19937_64& rng) const override {
        const std::size_t nw = static_cast<std::size_t>(in.size()) * out_;
        he_normal(p.first(nw), in.size(), rng);
        std::fill(p.begin() + nw, p.end(), 0.0);
    }
    void forward(const Shape& s, std::span<const double> p, const RowMatrix& in, RowMatrix& out, LayerCache&, bool,
                 std::mt19937_64*) const override {
        ConstMap w(p.data(), s.size(), out_);
        Eigen::Map<const Eigen::RowVectorXd> bias(p.data() + static_cast<std::size_t>(s.size()) * out_, out_);
        out.noalias() = in * w;
        out.rowwise() += bias;
    }
    void backward(const Shape& s, std::span<const double> p, const RowMatrix& in, const RowMatrix&,
                  const RowMatrix& dout, RowMatrix& din, std::span<double> grad, const LayerCache&) const override {
        ConstMap w(p.data(), s.size(), out_);
        MutMap gw(grad.data(), s.size(), out_);
        Eigen::Map<Eigen::RowVectorXd> gb(grad.data() + static_cast<std::size_t>(s.size()) * out_, out_);
        gw.noalias() += in.transpose() * dout;
        gb += dout.colwise().sum();
        din.noalias() = dout * w.transpose();
    }

private:
    int out_;
};

class Dropout final : public Layer {
public:
    explicit Dropout(double rate) : rate_(rate) {
        if (!(rate >= 0.0 && rate < 1.0)) throw ContractError("dropout rate must be in [0, 1)");
    }
    std::string name() const override { return "dropout"; }
    Shape output_shape(const Shape& in) const override { return in; }
    void forward(const Shape&, std::span<const double>, const RowMatrix& in, RowMatrix& out, LayerCache& cache,
                 bool train, std::mt19937_64* rng) const override {
        if (!train || rate_ == 0.0) {
            cache.aux.resize(0, 0);
            out = in;
            return;
        }
        if (!rng) throw ContractError("dropout in training mode needs a random generator");
        std::bernoulli_distribution keep(1.0 - rate_);
        const double scale = 1.0 / (1.0 - rate_);
        cache.aux.resize(in.rows(), in.cols());
        for (Eigen::Index i = 0; i < in.size(); ++i) cache.aux.data()[i] = keep(*rng) ? scale : 0.0;
        out = in.cwiseProduct(cache.aux);
    }
    void backward(const Shape&, std::span<const double>, const RowMatrix&, const RowMatrix&, const RowMatrix& dout,
                  RowMatrix& din, std::span<double>, const LayerCache& cache) const override {
        din = cache.aux.size() ? RowMatrix(dout.cwiseProduct(cache.aux)) : dout;
    }

private:
    double rate_;
};

std::unique_ptr<Layer> make_layer(const Network::LayerSpec& s) {
    if (s.kind == "conv3x3") return make_conv3x3(static_cast<int>(s.arg));
    if (s.kind == "relu") return make_relu();
    if (s.kind == "maxpool2") return make_maxpool2();
    if (s.kind == "dense") return make_dense(static_cast<int>(s.arg));
    if (s.kind == "dropout") return make_dropout(s.arg);
    throw ParseError("unknown layer kind '" + s.kind + "'");
}

double bce_with_logits(const RowMatrix& z, const RowMatrix& y, RowMatrix* dz) {
    if (z.rows() != y.rows() || z.cols() != y.cols()) throw ShapeError("label matrix shape mismatch");
    const double denom = static_cast<double>(z.size());
    double total = 0.0;
    if (dz) dz->resize(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double v = z.data()[i], t = y.data()[i];
        total += std::max(v, 0.0) - v * t + std::log1p(std::exp(-std::abs(v)));
        if (dz) dz->data()[i] = (1.0 / (1.0 + std::exp(-v)) - t) / denom;
    }
    return total / denom;
}

}  // namespace

std::string to_string(const Shape& s) {
    return std::to_string(s.h) + "x" + std::to_string(s.w) + "x" + std::to_string(s.c);
}

std::unique_ptr<Layer> make_conv3x3(int out_channels) { return std::make_unique<Conv3x3>(out_channels); }
std::unique_ptr<Layer> make_relu() { return std::make_unique<Relu>(); }
std::unique_ptr<Layer> make_maxpool2() { return std::make_unique<MaxPool2>(); }
std::unique_ptr<Layer> make_dense(int out_features) { return std::make_unique<Dense>(out_features); }
std::unique_ptr<Layer> make_dropout(double rate) { return std::make_unique<Dropout>(rate); }

Network::Network(Shape input, std::vector<LayerSpec> specs) : input_(input), specs_(std::move(specs)) {
    Shape cur = input_;
    std::size_t total = 0;
    for (const auto& s : specs_) {
        layers_.push_back(make_layer(s));
        offsets_.push_back(total);
        total += layers_.back()->param_count(cur);
        cur = layers_.back()->output_shape(cur);
        shapes_.push_back(cur);
    }
    offsets_.push_back(total);
    params_.assign(total, 0.0);
}

Network::Network(const Network& other) : Network(other.input_, other.specs_) { params_ = other.params_; }

Network& Network::operator=(const Network& other) {
    if (this != &other) *this = Network(other);
    return *this;
}

std::vector<std::size_t> Network::layer_param_counts() const {
    std::vector<std::size_t> out;
    for (std::size_t l = 0; l < layers_.size(); ++l) out.push_back(offsets_[l + 1] - offsets_[l]);
    return out;
}

std::span<const double> Network::layer_params(std::size_t l) const {
    return std::span<const double>(params_).subspan(offsets_[l], offsets_[l + 1] - offsets_[l]);
}

void Network::init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Shape cur = input_;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        layers_[l]->init(cur, std::span<double>(params_).subspan(offsets_[l], offsets_[l + 1] - offsets_[l]), rng);
        cur = shapes_[l];
    }
}

RowMatrix Network::logits(const RowMatrix& x, bool train, std::mt19937_64* rng) const {
    if (x.cols() != input_.size()) throw ShapeError("network input has " + std::to_string(x.cols()) +
                                                    " features, expected " + std::to_string(input_.size()));
    RowMatrix cur = x, next;
    LayerCache cache;
    Shape s = input_;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        layers_[l]->forward(s, layer_params(l), cur, next, cache, train, rng);
        cur.swap(next);
        s = shapes_[l];
    }
    return cur;
}

RowMatrix Network::scores(const RowMatrix& x, bool train, std::mt19937_64* rng) const {
    RowMatrix z = logits(x, train, rng);
    return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

double Network::loss_and_gradient(const RowMatrix& x, const RowMatrix& y, bool train, std::mt19937_64* rng,
                                  ParamVector& grad) const {
    if (x.cols() != input_.size()) throw ShapeError("network input dimension mismatch");
    const std::size_t nl = layers_.size();
    std::vector<RowMatrix> acts(nl + 1);
    std::vector<LayerCache> caches(nl);
    acts[0] = x;
    Shape s = input_;
    std::vector<Shape> in_shapes(nl);
    for (std::size_t l = 0; l < nl; ++l) {
        in_shapes[l] = s;
        layers_[l]->forward(s, layer_params(l), acts[l], acts[l + 1], caches[l], train, rng);
        s = shapes_[l];
    }
    RowMatrix d, dprev;
    const double loss = bce_with_logits(acts[nl], y, &d);
    grad.assign(params_.size(), 0.0);
    for (std::size_t l = nl; l-- > 0;) {
        auto g = std::span<double>(grad).subspan(offsets_[l], offsets_[l + 1] - offsets_[l]);
        layers_[l]->backward(in_shapes[l], layer_params(l), acts[l], acts[l + 1], d, dprev, g, caches[l]);
        d.swap(dprev);
    }
    return loss;
}

double Network::loss(const RowMatrix& x, const RowMatrix& y) const { return bce_with_logits(logits(x), y, nullptr); }

TrainHistory train_network(Network& net, const RowMatrix& x, const RowMatrix& y, const TrainConfig& cfg) {
    if (x.rows() != y.rows()) throw ShapeError("sample and label counts differ");
    if (x.rows() < 1 || cfg.batch < 1) throw ContractError("training needs samples and a positive batch size");
    std::mt19937_64 rng(cfg.seed);
    const std::size_t np = net.param_count();
    ParamVector m(np, 0.0), v(np, 0.0), grad;
    std::vector<Eigen::Index> order(x.rows());
    std::iota(order.begin(), order.end(), 0);
    TrainHistory hist;
    long long step = 0;
    RowMatrix bx, by;
    auto& p = net.params();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
            const std::size_t end = std::min(order.size(), start + cfg.batch);
            bx.resize(static_cast<Eigen::Index>(end - start), x.cols());
            by.resize(bx.rows(), y.cols());
            for (std::size_t i = start; i < end; ++i) {
                bx.row(i - start) = x.row(order[i]);
                by.row(i - start) = y.row(order[i]);
            }
            const double loss = net.loss_and_gradient(bx, by, true, &rng, grad);
            if (!std::isfinite(loss)) throw TrainingDiverged("non-finite loss in epoch " + std::to_string(epoch));
            ++step;
            const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            for (std::size_t k = 0; k < np; ++k) {
                m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * grad[k];
                v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
                p[k] -= cfg.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg.eps);
            }
            epoch_loss += loss;
            ++batches;
        }
        hist.epoch_loss.push_back(epoch_loss / batches);
    }
    return hist;
}

Network make_cnn(const CnnConfig& cfg) {
    if (cfg.m % 4 != 0) throw ShapeError("CNN input resolution must be divisible by 4");
    return Network({cfg.m, cfg.m, cfg.in_channels}, {{"conv3x3", double(cfg.conv1)},
                                                     {"relu", 0},
                                                     {"maxpool2", 0},
                                                     {"conv3x3", double(cfg.conv2)},
                                                     {"relu", 0},
                                                     {"maxpool2", 0},
                                                     {"dense", double(cfg.hidden)},
                                                     {"relu", 0},
                                                     {"dropout", cfg.dropout},
                                                     {"dense", double(cfg.outputs)}});
}

Network make_mlp(int inputs, int hidden, int outputs) {
    return Network({1, 1, inputs}, {{"dense", double(hidden)}, {"relu", 0}, {"dense", double(outputs)}});
}

}  // namespace precsel
