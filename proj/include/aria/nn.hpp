#pragma once

// Minimal deterministic training engine: dense and convolutional layers,
// max pooling, inverted dropout and a fused softmax/cross-entropy head.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "aria/activation.hpp"
#include "aria/rng.hpp"
#include "aria/tensor.hpp"

namespace aria::nn {

// ---------------------------------------------------------------------------
// Declarative specs
// ---------------------------------------------------------------------------

/// A missing activation means the layer is linear (used for logits).
struct DenseSpec {
    std::size_t in = 0;
    std::size_t out = 0;
    std::optional<Activation> activation;
};

struct Conv2DSpec {
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel_h = 3;
    std::size_t kernel_w = 3;
    std::size_t stride = 1;
    std::size_t padding = 0;
    std::optional<Activation> activation;
};

struct MaxPool2DSpec {
    std::size_t window = 2;
    std::size_t stride = 2;
};

struct DropoutSpec {
    double rate = 0.0;  // in [0, 1)
};

struct FlattenSpec {};

struct SoftmaxOutputSpec {
    std::size_t classes = 0;
};

using LayerSpec =
    std::variant<DenseSpec, Conv2DSpec, MaxPool2DSpec, DropoutSpec, FlattenSpec, SoftmaxOutputSpec>;

std::string layer_name(const LayerSpec& spec);

struct ModelSpec {
    Shape input_shape;  // per-sample, e.g. {2} or {1, 28, 28}
    std::vector<LayerSpec> layers;
    std::uint64_t seed = 0;
};

struct AdamSpec {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct SgdSpec {
    double lr = 0.1;
    double decay_factor = 1.0;
    std::vector<std::size_t> decay_epochs;  // 0-based epoch indices at which lr is multiplied
};

using OptimizerSpec = std::variant<AdamSpec, SgdSpec>;

struct TrainConfig {
    OptimizerSpec optimizer = AdamSpec{};
    std::size_t epochs = 1;
    std::size_t batch_size = 32;
    std::uint64_t shuffle_seed = 1;
};

void validate(const OptimizerSpec& spec);
void validate(const TrainConfig& cfg);

/// Hidden-layer activation substitution used by sweeps: every layer that
/// carries an activation gets `a`; linear layers stay linear.
ModelSpec with_activation(ModelSpec spec, const Activation& a);

// ---------------------------------------------------------------------------
// Runtime
// ---------------------------------------------------------------------------

enum class Mode { Train, Eval };

class Layer {
public:
    virtual ~Layer() = default;

    /// Caches what backward() needs.
    virtual Tensor forward(const Tensor& input, Mode mode, SplitMix64& dropout_rng) = 0;
    /// Accumulates parameter gradients and returns d loss / d input.
    virtual Tensor backward(const Tensor& grad_output) = 0;

    virtual std::vector<Tensor*> parameters() { return {}; }
    virtual std::vector<Tensor*> gradients() { return {}; }
};

class Model {
public:
    Model(ModelSpec spec, std::vector<std::unique_ptr<Layer>> layers, std::size_t classes);
    Model(Model&&) noexcept = default;
    Model& operator=(Model&&) noexcept = default;

    const ModelSpec& spec() const noexcept { return spec_; }
    std::size_t classes() const noexcept { return classes_; }

    /// Pre-softmax scores, shape (N, classes).
    Tensor logits(const Tensor& batch, Mode mode);
    /// Backpropagates d loss / d logits through every layer.
    void backward(const Tensor& grad_logits);

    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;
    std::vector<Tensor*> gradients();
    std::size_t parameter_count() const;
    void zero_gradients();

    /// Restarts the dropout stream, making Train-mode masks reproducible.
    void reseed_dropout(std::uint64_t seed) noexcept { dropout_rng_ = SplitMix64(seed); }

private:
    void check_input(const Tensor& batch) const;

    ModelSpec spec_;
    std::vector<std::unique_ptr<Layer>> layers_;
    std::size_t classes_;
    SplitMix64 dropout_rng_;
};

/// Validates the shape chain and initializes weights He-uniform
/// (bound sqrt(6 / fan_in), biases zero) from the seed's init stream.
/// Throws ShapeMismatch naming the first offending layer pair.
Model build_model(const ModelSpec& spec);

/// Per-sample output shape of every layer, validated against `spec`.
std::vector<Shape> infer_shapes(const ModelSpec& spec);

/// Class probabilities, shape (N, classes).
Tensor forward(Model& m, const Tensor& batch, Mode mode);

/// Row-wise max-subtracted softmax.
Tensor softmax(const Tensor& logits);

struct Gradients {
    std::vector<Tensor> tensors;  // aligned with Model::parameters()
};

struct LossAndGradients {
    double loss = 0.0;
    Gradients gradients;
};

/// Mean softmax cross-entropy and its gradients for every parameter.
LossAndGradients loss_and_gradients(Model& m, const Tensor& batch,
                                    std::span<const std::size_t> labels, Mode mode = Mode::Train);

/// Forward-only mean cross-entropy.
double loss(Model& m, const Tensor& batch, std::span<const std::size_t> labels,
            Mode mode = Mode::Eval);

/// Rows whose argmax (lowest index on ties) equals the label.
std::size_t correct_predictions(const Tensor& probabilities, std::span<const std::size_t> labels);
double accuracy(const Tensor& probabilities, std::span<const std::size_t> labels);

/// lr0 * decay_factor^k where k counts decay epochs <= epoch.
double scheduled_lr(const SgdSpec& spec, std::size_t epoch);

class Optimizer {
public:
    Optimizer(OptimizerSpec spec, const Model& model);

    /// Updates parameters in place. `epoch` is the 0-based epoch index.
    void step(Model& model, const Gradients& grads, std::size_t epoch);

    double learning_rate(std::size_t epoch) const;
    std::uint64_t steps() const noexcept { return steps_; }

private:
    OptimizerSpec spec_;
    std::vector<Tensor> first_moment_;
    std::vector<Tensor> second_moment_;
    std::uint64_t steps_ = 0;
};

}  // namespace aria::nn
