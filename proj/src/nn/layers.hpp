#pragma once

// Concrete layer implementations. Internal to the library.

#include <memory>

#include "aria/nn.hpp"

namespace aria::nn::detail {

class DenseLayer final : public Layer {
public:
    DenseLayer(const DenseSpec& spec, SplitMix64& init_rng);

    Tensor forward(const Tensor& input, Mode mode, SplitMix64& dropout_rng) override;
    Tensor backward(const Tensor& grad_output) override;
    std::vector<Tensor*> parameters() override { return {&weights_, &bias_}; }
    std::vector<Tensor*> gradients() override { return {&grad_weights_, &grad_bias_}; }

private:
    DenseSpec spec_;
    Tensor weights_;  // (out, in)
    Tensor bias_;     // (out)
    Tensor grad_weights_;
    Tensor grad_bias_;
    Tensor input_;
    Tensor pre_activation_;
    Tensor slope_;  // activation derivative at pre_activation_, Train mode only
};

class Conv2DLayer final : public Layer {
public:
    Conv2DLayer(const Conv2DSpec& spec, SplitMix64& init_rng);

    Tensor forward(const Tensor& input, Mode mode, SplitMix64& dropout_rng) override;
    Tensor backward(const Tensor& grad_output) override;
    std::vector<Tensor*> parameters() override { return {&weights_, &bias_}; }
    std::vector<Tensor*> gradients() override { return {&grad_weights_, &grad_bias_}; }

private:
    Conv2DSpec spec_;
    Tensor weights_;  // (out_c, in_c, kh, kw)
    Tensor bias_;     // (out_c)
    Tensor grad_weights_;
    Tensor grad_bias_;
    Tensor input_;
    Tensor pre_activation_;
    Tensor slope_;  // activation derivative at pre_activation_, Train mode only
};

class MaxPool2DLayer final : public Layer {
public:
    explicit MaxPool2DLayer(const MaxPool2DSpec& spec) : spec_(spec) {}

    Tensor forward(const Tensor& input, Mode mode, SplitMix64& dropout_rng) override;
    Tensor backward(const Tensor& grad_output) override;

private:
    MaxPool2DSpec spec_;
    Shape input_shape_;
    std::vector<std::size_t> argmax_;  // flat input index per output element
};

class DropoutLayer final : public Layer {
public:
    explicit DropoutLayer(const DropoutSpec& spec) : spec_(spec) {}

    Tensor forward(const Tensor& input, Mode mode, SplitMix64& dropout_rng) override;
    Tensor backward(const Tensor& grad_output) override;

private:
    DropoutSpec spec_;
    std::vector<double> mask_;  // 0 or 1/(1-rate); empty in Eval mode
};

class FlattenLayer final : public Layer {
public:
    Tensor forward(const Tensor& input, Mode mode, SplitMix64& dropout_rng) override;
    Tensor backward(const Tensor& grad_output) override;

private:
    Shape input_shape_;
};

}  // namespace aria::nn::detail
