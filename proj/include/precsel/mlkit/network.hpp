#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "precsel/error.hpp"
#include "precsel/mlkit/preprocessing.hpp"

namespace precsel {

/// Flat parameter storage. Aligned so vectorized reductions over it are reproducible.
using ParamVector = std::vector<double, Eigen::aligned_allocator<double>>;

/// Activation shape of one sample, stored as height x width x channels in
/// HWC order. Dense activations use 1 x 1 x n.
struct Shape {
    int h = 1, w = 1, c = 1;
    int size() const { return h * w * c; }
    friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

/// Scratch a layer keeps between its forward and backward pass.
struct LayerCache {
    RowMatrix aux;
    std::vector<int> index;
};

class Layer {
public:
    virtual ~Layer() = default;
    virtual std::string name() const = 0;
    virtual Shape output_shape(const Shape& in) const = 0;
    virtual std::size_t param_count(const Shape& /*in*/) const { return 0; }
    /// Fan-in scaled (He) normal weights, zero biases.
    virtual void init(const Shape& /*in*/, std::span<double> /*params*/, std::mt19937_64& /*rng*/) const {}
    /// `in` is batch x in.size(); `out` becomes batch x out.size().
    virtual void forward(const Shape& in_shape, std::span<const double> params, const RowMatrix& in, RowMatrix& out,
                         LayerCache& cache, bool train, std::mt19937_64* rng) const = 0;
    /// Accumulates parameter gradients into `grad` and writes d(loss)/d(in).
    virtual void backward(const Shape& in_shape, std::span<const double> params, const RowMatrix& in,
                          const RowMatrix& out, const RowMatrix& dout, RowMatrix& din, std::span<double> grad,
                          const LayerCache& cache) const = 0;
};

/// 3x3 convolution, stride 1, zero "same" padding.
std::unique_ptr<Layer> make_conv3x3(int out_channels);
std::unique_ptr<Layer> make_relu();
/// 2x2 max pooling, stride 2; input height and width must be even.
std::unique_ptr<Layer> make_maxpool2();
/// Fully connected; flattens any input shape in HWC order.
std::unique_ptr<Layer> make_dense(int out_features);
/// Inverted dropout; identity outside training.
std::unique_ptr<Layer> make_dropout(double rate);

class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sequential network producing K logits; scores are sigmoid(logits).
class Network {
public:
    struct LayerSpec {
        std::string kind;  // conv3x3 | relu | maxpool2 | dense | dropout
        double arg = 0;    // channels / features / rate
    };

    Network() = default;
    Network(Shape input, std::vector<LayerSpec> specs);
    Network(const Network& other);
    Network& operator=(const Network& other);
    Network(Network&&) = default;
    Network& operator=(Network&&) = default;

    const Shape& input_shape() const { return input_; }
    const std::vector<LayerSpec>& specs() const { return specs_; }
    /// Output shape of every layer.
    const std::vector<Shape>& shapes() const { return shapes_; }
    int outputs() const { return shapes_.empty() ? input_.size() : shapes_.back().size(); }

    std::size_t param_count() const { return params_.size(); }
    /// Parameter count of each layer.
    std::vector<std::size_t> layer_param_counts() const;
    ParamVector& params() { return params_; }
    const ParamVector& params() const { return params_; }

    void init(std::uint64_t seed);

    /// batch x K logits. `rng` drives dropout masks and is only used when train.
    RowMatrix logits(const RowMatrix& x, bool train = false, std::mt19937_64* rng = nullptr) const;
    RowMatrix scores(const RowMatrix& x, bool train = false, std::mt19937_64* rng = nullptr) const;

    /// Mean per-label binary cross-entropy on logits; fills `grad` (resized
    /// to param_count()) with its gradient.
    double loss_and_gradient(const RowMatrix& x, const RowMatrix& y, bool train, std::mt19937_64* rng,
                             ParamVector& grad) const;
    double loss(const RowMatrix& x, const RowMatrix& y) const;

private:
    Shape input_;
    std::vector<LayerSpec> specs_;
    std::vector<std::unique_ptr<Layer>> layers_;
    std::vector<Shape> shapes_;
    std::vector<std::size_t> offsets_;
    ParamVector params_;

    std::span<const double> layer_params(std::size_t l) const;
};

struct TrainConfig {
    int epochs = 50;
    int batch = 16;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 0;
};

struct TrainHistory {
    std::vector<double> epoch_loss;  // mean mini-batch loss per epoch
};

/// Mini-batch Adam on mean binary cross-entropy. Throws TrainingDiverged on
/// a non-finite loss.
TrainHistory train_network(Network& net, const RowMatrix& x, const RowMatrix& y, const TrainConfig& cfg);

/// The image network: conv(3x3, c1, ReLU) -> maxpool -> conv(3x3, c2, ReLU)
/// -> maxpool -> dense(hidden, ReLU) -> dropout -> dense(K).
struct CnnConfig {
    int m = 32;
    int in_channels = 3;
    int conv1 = 32;
    int conv2 = 64;
    int hidden = 128;
    int outputs = 10;
    double dropout = 0.5;
};

Network make_cnn(const CnnConfig& cfg);
/// dense(hidden, ReLU) -> dense(K).
Network make_mlp(int inputs, int hidden, int outputs);

}  // namespace precsel
