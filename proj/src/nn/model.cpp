#include <algorithm>
#include <cmath>

#include "aria/errors.hpp"
#include "aria/nn.hpp"
#include "layers.hpp"

namespace aria::nn {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string describe(std::size_t index, const LayerSpec& spec) {
    return "layer " + std::to_string(index) + " (" + layer_name(spec) + ")";
}

// Names the producer of the current shape: the previous layer, or the input.
std::string producer(std::size_t index, const ModelSpec& spec) {
    if (index == 0) return "model input";
    return describe(index - 1, spec.layers[index - 1]);
}

}  // namespace

std::string layer_name(const LayerSpec& spec) {
    return std::visit(Overloaded{
                          [](const DenseSpec&) { return std::string("dense"); },
                          [](const Conv2DSpec&) { return std::string("conv2d"); },
                          [](const MaxPool2DSpec&) { return std::string("maxpool2d"); },
                          [](const DropoutSpec&) { return std::string("dropout"); },
                          [](const FlattenSpec&) { return std::string("flatten"); },
                          [](const SoftmaxOutputSpec&) { return std::string("softmax"); },
                      },
                      spec);
}

std::vector<Shape> infer_shapes(const ModelSpec& spec) {
    if (spec.input_shape.empty() || element_count(spec.input_shape) == 0) {
        throw ShapeMismatch("model input shape must be non-empty with positive extents");
    }
    if (spec.layers.empty() || !std::holds_alternative<SoftmaxOutputSpec>(spec.layers.back())) {
        throw ShapeMismatch("last layer must be a softmax output");
    }

    std::vector<Shape> shapes;
    Shape current = spec.input_shape;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& layer = spec.layers[i];
        const auto mismatch = [&](const std::string& what) {
            return ShapeMismatch(describe(i, layer) + " " + what + " but " + producer(i, spec) +
                                 " produces " + to_string(current));
        };
        std::visit(
            Overloaded{
                [&](const DenseSpec& d) {
                    if (d.in == 0 || d.out == 0) throw mismatch("has a zero extent");
                    if (current.size() != 1 || current[0] != d.in) {
                        throw mismatch("expects (" + std::to_string(d.in) + ")");
                    }
                    current = {d.out};
                },
                [&](const Conv2DSpec& c) {
                    if (c.in_channels == 0 || c.out_channels == 0 || c.kernel_h == 0 ||
                        c.kernel_w == 0 || c.stride == 0) {
                        throw mismatch("has a zero extent");
                    }
                    if (current.size() != 3 || current[0] != c.in_channels) {
                        throw mismatch("expects (" + std::to_string(c.in_channels) + ",H,W)");
                    }
                    const std::size_t hp = current[1] + 2 * c.padding;
                    const std::size_t wp = current[2] + 2 * c.padding;
                    if (hp < c.kernel_h || wp < c.kernel_w) throw mismatch("kernel exceeds padded input");
                    current = {c.out_channels, (hp - c.kernel_h) / c.stride + 1,
                               (wp - c.kernel_w) / c.stride + 1};
                },
                [&](const MaxPool2DSpec& p) {
                    if (p.window == 0 || p.stride == 0) throw mismatch("has a zero extent");
                    if (current.size() != 3) throw mismatch("expects (C,H,W)");
                    if (current[1] < p.window || current[2] < p.window) {
                        throw mismatch("window exceeds input");
                    }
                    current = {current[0], (current[1] - p.window) / p.stride + 1,
                               (current[2] - p.window) / p.stride + 1};
                },
                [&](const DropoutSpec& d) {
                    if (!(d.rate >= 0.0 && d.rate < 1.0)) {
                        throw InvalidParams(describe(i, layer) + " rate must be in [0, 1)");
                    }
                },
                [&](const FlattenSpec&) { current = {element_count(current)}; },
                [&](const SoftmaxOutputSpec& s) {
                    if (i + 1 != spec.layers.size()) {
                        throw ShapeMismatch(describe(i, layer) + " must be the last layer");
                    }
                    if (current.size() != 1 || current[0] != s.classes || s.classes == 0) {
                        throw mismatch("expects (" + std::to_string(s.classes) + ")");
                    }
                },
            },
            layer);
        shapes.push_back(current);
    }
    return shapes;
}

Model build_model(const ModelSpec& spec) {
    infer_shapes(spec);
    SplitMix64 init_rng(spec.seed + kInitStream);
    std::vector<std::unique_ptr<Layer>> layers;
    std::size_t classes = 0;
    for (const LayerSpec& layer : spec.layers) {
        std::visit(Overloaded{
                       [&](const DenseSpec& d) {
                           layers.push_back(std::make_unique<detail::DenseLayer>(d, init_rng));
                       },
                       [&](const Conv2DSpec& c) {
                           layers.push_back(std::make_unique<detail::Conv2DLayer>(c, init_rng));
                       },
                       [&](const MaxPool2DSpec& p) {
                           layers.push_back(std::make_unique<detail::MaxPool2DLayer>(p));
                       },
                       [&](const DropoutSpec& d) {
                           layers.push_back(std::make_unique<detail::DropoutLayer>(d));
                       },
                       [&](const FlattenSpec&) {
                           layers.push_back(std::make_unique<detail::FlattenLayer>());
                       },
                       [&](const SoftmaxOutputSpec& s) { classes = s.classes; },
                   },
                   layer);
    }
    return Model(spec, std::move(layers), classes);
}

ModelSpec with_activation(ModelSpec spec, const Activation& a) {
    for (LayerSpec& layer : spec.layers) {
        if (auto* d = std::get_if<DenseSpec>(&layer); d && d->activation) d->activation = a;
        if (auto* c = std::get_if<Conv2DSpec>(&layer); c && c->activation) c->activation = a;
    }
    return spec;
}

// ---------------------------------------------------------------------------

Model::Model(ModelSpec spec, std::vector<std::unique_ptr<Layer>> layers, std::size_t classes)
    : spec_(std::move(spec)),
      layers_(std::move(layers)),
      classes_(classes),
      dropout_rng_(spec_.seed + kDropoutStream) {}

void Model::check_input(const Tensor& batch) const {
    const Shape& s = batch.shape();
    const bool ok = s.size() == spec_.input_shape.size() + 1 && s[0] > 0 &&
                    std::equal(spec_.input_shape.begin(), spec_.input_shape.end(), s.begin() + 1);
    if (!ok) {
        throw ShapeMismatch("batch shape " + to_string(s) + " does not match model input (N," +
                            to_string(spec_.input_shape).substr(1));
    }
}

Tensor Model::logits(const Tensor& batch, Mode mode) {
    check_input(batch);
    Tensor x = batch;
    for (auto& layer : layers_) x = layer->forward(x, mode, dropout_rng_);
    return x;
}

void Model::backward(const Tensor& grad_logits) {
    Tensor g = grad_logits;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
}

std::vector<Tensor*> Model::parameters() {
    std::vector<Tensor*> out;
    for (auto& layer : layers_) {
        for (Tensor* t : layer->parameters()) out.push_back(t);
    }
    return out;
}

std::vector<const Tensor*> Model::parameters() const {
    std::vector<const Tensor*> out;
    for (const auto& layer : layers_) {
        for (Tensor* t : layer->parameters()) out.push_back(t);
    }
    return out;
}

std::vector<Tensor*> Model::gradients() {
    std::vector<Tensor*> out;
    for (auto& layer : layers_) {
        for (Tensor* t : layer->gradients()) out.push_back(t);
    }
    return out;
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (const Tensor* t : parameters()) n += t->size();
    return n;
}

void Model::zero_gradients() {
    for (Tensor* g : gradients()) g->fill(0.0);
}

// ---------------------------------------------------------------------------

Tensor softmax(const Tensor& logits) {
    Tensor out(logits.shape());
    const std::size_t n = logits.extent(0);
    const std::size_t k = logits.row_size();
    for (std::size_t r = 0; r < n; ++r) {
        auto in = logits.row(r);
        auto dst = out.row(r);
        const double m = *std::max_element(in.begin(), in.end());
        double total = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            dst[j] = std::exp(in[j] - m);
            total += dst[j];
        }
        for (std::size_t j = 0; j < k; ++j) dst[j] /= total;
    }
    return out;
}

Tensor forward(Model& m, const Tensor& batch, Mode mode) { return softmax(m.logits(batch, mode)); }

namespace {

void check_labels(const Model& m, const Tensor& batch, std::span<const std::size_t> labels) {
    if (labels.size() != batch.extent(0)) {
        throw ShapeMismatch("batch has " + std::to_string(batch.extent(0)) + " rows but " +
                            std::to_string(labels.size()) + " labels");
    }
    for (std::size_t label : labels) {
        if (label >= m.classes()) {
            throw LabelOutOfRange("label " + std::to_string(label) + " outside [0, " +
                                  std::to_string(m.classes()) + ")");
        }
    }
}

// Mean of logsumexp(z) - z[label]; fills d loss / d z when grad != nullptr.
double cross_entropy(const Tensor& logits, std::span<const std::size_t> labels, Tensor* grad) {
    const std::size_t n = logits.extent(0);
    const std::size_t k = logits.row_size();
    const double inv_n = 1.0 / static_cast<double>(n);
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        auto z = logits.row(r);
        const double m = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (double v : z) sum += std::exp(v - m);
        const double lse = m + std::log(sum);
        total += lse - z[labels[r]];
        if (grad) {
            auto g = grad->row(r);
            for (std::size_t j = 0; j < k; ++j) g[j] = std::exp(z[j] - lse) * inv_n;
            g[labels[r]] -= inv_n;
        }
    }
    return total * inv_n;
}

}  // namespace

LossAndGradients loss_and_gradients(Model& m, const Tensor& batch,
                                    std::span<const std::size_t> labels, Mode mode) {
    check_labels(m, batch, labels);
    const Tensor z = m.logits(batch, mode);
    Tensor grad_logits(z.shape());
    LossAndGradients result;
    result.loss = cross_entropy(z, labels, &grad_logits);
    m.zero_gradients();
    m.backward(grad_logits);
    for (Tensor* g : m.gradients()) result.gradients.tensors.push_back(*g);
    return result;
}

double loss(Model& m, const Tensor& batch, std::span<const std::size_t> labels, Mode mode) {
    check_labels(m, batch, labels);
    return cross_entropy(m.logits(batch, mode), labels, nullptr);
}

std::size_t correct_predictions(const Tensor& probabilities, std::span<const std::size_t> labels) {
    const std::size_t n = probabilities.extent(0);
    if (labels.size() != n) throw ShapeMismatch("prediction and label counts differ");
    std::size_t correct = 0;
    for (std::size_t r = 0; r < n; ++r) {
        auto p = probabilities.row(r);
        // max_element returns the first maximum: ties go to the lowest index.
        const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
        if (best == labels[r]) ++correct;
    }
    return correct;
}

double accuracy(const Tensor& probabilities, std::span<const std::size_t> labels) {
    const std::size_t n = probabilities.extent(0);
    if (n == 0) return 0.0;
    return static_cast<double>(correct_predictions(probabilities, labels)) / static_cast<double>(n);
}

}  // namespace aria::nn
