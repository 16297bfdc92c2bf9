#include <cmath>

#include "aria/errors.hpp"
#include "aria/nn.hpp"

namespace aria::nn {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const char* message) {
    if (!ok) throw InvalidParams(message);
}

}  // namespace

void validate(const OptimizerSpec& spec) {
    std::visit(Overloaded{
                   [](const AdamSpec& a) {
                       require(std::isfinite(a.lr) && a.lr >= 0.0, "lr must be >= 0");
                       require(a.beta1 >= 0.0 && a.beta1 < 1.0, "beta1 must be in [0, 1)");
                       require(a.beta2 >= 0.0 && a.beta2 < 1.0, "beta2 must be in [0, 1)");
                       require(std::isfinite(a.eps) && a.eps > 0.0, "eps must be > 0");
                   },
                   [](const SgdSpec& s) {
                       require(std::isfinite(s.lr) && s.lr >= 0.0, "lr must be >= 0");
                       require(s.decay_factor > 0.0 && s.decay_factor <= 1.0,
                               "decay_factor must be in (0, 1]");
                   },
               },
               spec);
}

void validate(const TrainConfig& cfg) {
    validate(cfg.optimizer);
    require(cfg.epochs >= 1, "epochs must be >= 1");
    require(cfg.batch_size >= 1, "batch_size must be >= 1");
}

double scheduled_lr(const SgdSpec& spec, std::size_t epoch) {
    int decays = 0;
    for (std::size_t d : spec.decay_epochs) {
        if (d <= epoch) ++decays;
    }
    return spec.lr * std::pow(spec.decay_factor, decays);
}

Optimizer::Optimizer(OptimizerSpec spec, const Model& model) : spec_(std::move(spec)) {
    if (std::holds_alternative<AdamSpec>(spec_)) {
        for (const Tensor* p : model.parameters()) {
            first_moment_.emplace_back(p->shape());
            second_moment_.emplace_back(p->shape());
        }
    }
}

double Optimizer::learning_rate(std::size_t epoch) const {
    return std::visit(Overloaded{
                          [](const AdamSpec& a) { return a.lr; },
                          [epoch](const SgdSpec& s) { return scheduled_lr(s, epoch); },
                      },
                      spec_);
}

void Optimizer::step(Model& model, const Gradients& grads, std::size_t epoch) {
    std::vector<Tensor*> params = model.parameters();
    if (params.size() != grads.tensors.size()) {
        throw ShapeMismatch("gradient count does not match parameter count");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i]->shape() != grads.tensors[i].shape()) {
            throw ShapeMismatch("gradient " + std::to_string(i) + " has shape " +
                                to_string(grads.tensors[i].shape()) + ", parameter has " +
                                to_string(params[i]->shape()));
        }
    }
    ++steps_;

    if (const auto* sgd = std::get_if<SgdSpec>(&spec_)) {
        const double lr = scheduled_lr(*sgd, epoch);
        for (std::size_t i = 0; i < params.size(); ++i) {
            Tensor& w = *params[i];
            const Tensor& g = grads.tensors[i];
            for (std::size_t j = 0; j < w.size(); ++j) w[j] -= lr * g[j];
        }
        return;
    }

    const auto& adam = std::get<AdamSpec>(spec_);
    const double t = static_cast<double>(steps_);
    const double c1 = 1.0 - std::pow(adam.beta1, t);
    const double c2 = 1.0 - std::pow(adam.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& w = *params[i];
        const Tensor& g = grads.tensors[i];
        Tensor& m = first_moment_[i];
        Tensor& v = second_moment_[i];
        for (std::size_t j = 0; j < w.size(); ++j) {
            m[j] = adam.beta1 * m[j] + (1.0 - adam.beta1) * g[j];
            v[j] = adam.beta2 * v[j] + (1.0 - adam.beta2) * g[j] * g[j];
            const double m_hat = m[j] / c1;
            const double v_hat = v[j] / c2;
            w[j] -= adam.lr * m_hat / (std::sqrt(v_hat) + adam.eps);
        }
    }
}

}  // namespace aria::nn
