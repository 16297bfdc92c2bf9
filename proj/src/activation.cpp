#include "aria/activation.hpp"

#include <cmath>

#include "aria/errors.hpp"
#include "aria/format.hpp"
#include "aria/tensor.hpp"

namespace aria {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw InvalidParams(std::string(name) + " must be finite");
}

// Unchecked kernels. Callers guarantee validated parameters.

double gate_kernel(double alpha, double beta, double x) noexcept {
    const double t = beta * x;
    if (t == 0.0) return std::exp2(-alpha);
    return std::exp(-alpha * softplus(-t));
}

double aria2_value_kernel(double alpha, double beta, double x) noexcept {
    return x * gate_kernel(alpha, beta, x);
}

// d/dx [x (1+e^{-bx})^{-a}] = g (1 + x a b (1 - s)), with g the gate and
// s = logistic(bx); 1 - s is evaluated as logistic(-bx).
double aria2_derivative_kernel(double alpha, double beta, double x) noexcept {
    const double g = gate_kernel(alpha, beta, x);
    if (x == 0.0) return g;
    return g * (1.0 + x * alpha * beta * logistic(-beta * x));
}

struct RichardsTerms {
    double curve;  // A + (K - A) u^{-1/nu}
    double slope;  // d curve / dx
};

// u = C + Q e^{-Bx} is handled through log w = log Q - Bx:
//   log u     = log C + softplus(log w - log C)
//   w / u     = logistic(log w - log C)
RichardsTerms richards_kernel(const RichardsParams& p, double x) noexcept {
    const double log_c = std::log(p.C);
    double log_u = log_c;
    double w_over_u = 0.0;
    if (p.Q > 0.0) {
        const double z = std::log(p.Q) - p.B * x - log_c;
        log_u += softplus(z);
        w_over_u = logistic(z);
    }
    const double root = std::exp(-log_u / p.nu);
    const double span = p.K - p.A;
    return {p.A + span * root, span * (p.B / p.nu) * root * w_over_u};
}

}  // namespace

void validate(const RichardsParams& p) {
    require_finite(p.A, "A");
    require_finite(p.K, "K");
    require_finite(p.B, "B");
    require_finite(p.nu, "nu");
    require_finite(p.Q, "Q");
    require_finite(p.C, "C");
    if (!(p.nu > 0.0)) throw InvalidParams("nu must be > 0");
    if (!(p.C > 0.0)) throw InvalidParams("C must be > 0");
    if (!(p.Q >= 0.0)) throw InvalidParams("Q must be >= 0");
}

void validate(const Aria2Params& p) {
    require_finite(p.alpha, "alpha");
    require_finite(p.beta, "beta");
    if (!(p.alpha > 0.0)) throw InvalidParams("alpha must be > 0");
    if (!(p.beta >= 0.0)) throw InvalidParams("beta must be >= 0");
}

double softplus(double t) noexcept {
    return std::fmax(t, 0.0) + std::log1p(std::exp(-std::fabs(t)));
}

double logistic(double t) noexcept {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double relu(double x) noexcept { return x > 0.0 ? x : 0.0; }

// Subgradient at 0 is 0.
double relu_derivative(double x) noexcept { return x > 0.0 ? 1.0 : 0.0; }

double sigmoid(double beta, double x) {
    require_finite(beta, "beta");
    return logistic(beta * x);
}

double sigmoid_derivative(double beta, double x) {
    require_finite(beta, "beta");
    const double t = beta * x;
    return beta * logistic(t) * logistic(-t);
}

double richards_sigma(const RichardsParams& p, double x) {
    validate(p);
    return richards_kernel(p, x).curve;
}

double aria(const RichardsParams& p, double x) {
    validate(p);
    return x * richards_kernel(p, x).curve;
}

double aria_derivative(const RichardsParams& p, double x) {
    validate(p);
    const auto t = richards_kernel(p, x);
    return t.curve + x * t.slope;
}

double aria2_gate(const Aria2Params& p, double x) {
    validate(p);
    return gate_kernel(p.alpha, p.beta, x);
}

double aria2(const Aria2Params& p, double x) {
    validate(p);
    return aria2_value_kernel(p.alpha, p.beta, x);
}

double aria2_derivative(const Aria2Params& p, double x) {
    validate(p);
    return aria2_derivative_kernel(p.alpha, p.beta, x);
}

double swish(double beta, double x) {
    require_finite(beta, "beta");
    return aria2_value_kernel(1.0, beta, x);
}

double swish_derivative(double beta, double x) {
    require_finite(beta, "beta");
    return aria2_derivative_kernel(1.0, beta, x);
}

// ---------------------------------------------------------------------------

Activation::Activation(ActivationKind kind) : kind_(kind) {
    std::visit(Overloaded{
                   [](const Relu&) {},
                   [](const Sigmoid& s) { require_finite(s.beta, "beta"); },
                   [](const Swish& s) { require_finite(s.beta, "beta"); },
                   [](const Aria1& a) { validate(Aria2Params{a.alpha, 1.0}); },
                   [](const Aria2& a) { validate(a.params); },
                   [](const AriaFull& a) { validate(a.params); },
               },
               kind_);
}

double Activation::value(double x) const noexcept {
    return std::visit(Overloaded{
                          [x](const Relu&) { return aria::relu(x); },
                          [x](const Sigmoid& s) { return logistic(s.beta * x); },
                          [x](const Swish& s) { return aria2_value_kernel(1.0, s.beta, x); },
                          [x](const Aria1& a) { return aria2_value_kernel(a.alpha, 1.0, x); },
                          [x](const Aria2& a) {
                              return aria2_value_kernel(a.params.alpha, a.params.beta, x);
                          },
                          [x](const AriaFull& a) { return x * richards_kernel(a.params, x).curve; },
                      },
                      kind_);
}

double Activation::derivative(double x) const noexcept {
    return std::visit(Overloaded{
                          [x](const Relu&) { return relu_derivative(x); },
                          [x](const Sigmoid& s) {
                              const double t = s.beta * x;
                              return s.beta * logistic(t) * logistic(-t);
                          },
                          [x](const Swish& s) { return aria2_derivative_kernel(1.0, s.beta, x); },
                          [x](const Aria1& a) { return aria2_derivative_kernel(a.alpha, 1.0, x); },
                          [x](const Aria2& a) {
                              return aria2_derivative_kernel(a.params.alpha, a.params.beta, x);
                          },
                          [x](const AriaFull& a) {
                              const auto t = richards_kernel(a.params, x);
                              return t.curve + x * t.slope;
                          },
                      },
                      kind_);
}

std::string Activation::name() const {
    return std::visit(Overloaded{
                          [](const Relu&) { return std::string("relu"); },
                          [](const Sigmoid&) { return std::string("sigmoid"); },
                          [](const Swish&) { return std::string("swish"); },
                          [](const Aria1&) { return std::string("aria1"); },
                          [](const Aria2&) { return std::string("aria2"); },
                          [](const AriaFull&) { return std::string("aria"); },
                      },
                      kind_);
}

std::string Activation::label() const {
    const auto f = [](double v) { return format_double(v); };
    return std::visit(
        Overloaded{
            [](const Relu&) { return std::string("relu"); },
            [&](const Sigmoid& s) { return "sigmoid(beta=" + f(s.beta) + ")"; },
            [&](const Swish& s) { return "swish(beta=" + f(s.beta) + ")"; },
            [&](const Aria1& a) { return "aria1(alpha=" + f(a.alpha) + ")"; },
            [&](const Aria2& a) {
                return "aria2(alpha=" + f(a.params.alpha) + ",beta=" + f(a.params.beta) + ")";
            },
            [&](const AriaFull& a) {
                const auto& p = a.params;
                return "aria(A=" + f(p.A) + ",K=" + f(p.K) + ",B=" + f(p.B) + ",nu=" + f(p.nu) +
                       ",Q=" + f(p.Q) + ",C=" + f(p.C) + ")";
            },
        },
        kind_);
}

double derivative(const Activation& a, double x) noexcept { return a.derivative(x); }

namespace {

// Value and slope of x (1+e^{-bx})^{-a} sharing e^{-|bx|} between the gate
// and logistic(-bx); the operation sequence matches the scalar kernels.
void aria2_batch(double alpha, double beta, std::span<const double> x, std::span<double> f,
                 std::span<double> df) noexcept {
    const bool slopes = !df.empty();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        const double t = beta * xi;
        if (t == 0.0) {
            const double g = std::exp2(-alpha);
            f[i] = xi * g;
            if (slopes) df[i] = g;
            continue;
        }
        const double e = std::exp(-std::fabs(t));
        const double g = std::exp(-alpha * (std::fmax(-t, 0.0) + std::log1p(e)));
        f[i] = xi * g;
        if (slopes) {
            const double one_minus_s = t < 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
            df[i] = xi == 0.0 ? g : g * (1.0 + xi * alpha * beta * one_minus_s);
        }
    }
}

}  // namespace

void Activation::evaluate(std::span<const double> x, std::span<double> f,
                          std::span<double> df) const noexcept {
    const auto generic = [&] {
        for (std::size_t i = 0; i < x.size(); ++i) f[i] = value(x[i]);
        for (std::size_t i = 0; i < df.size(); ++i) df[i] = derivative(x[i]);
    };
    std::visit(Overloaded{
                   [&](const Relu&) {
                       for (std::size_t i = 0; i < x.size(); ++i) f[i] = aria::relu(x[i]);
                       for (std::size_t i = 0; i < df.size(); ++i) df[i] = relu_derivative(x[i]);
                   },
                   [&](const Swish& s) { aria2_batch(1.0, s.beta, x, f, df); },
                   [&](const Aria1& a) { aria2_batch(a.alpha, 1.0, x, f, df); },
                   [&](const Aria2& a) { aria2_batch(a.params.alpha, a.params.beta, x, f, df); },
                   [&](const auto&) { generic(); },
               },
               kind_);
}

Tensor apply_elementwise(const Activation& a, const Tensor& xs) {
    Tensor out(xs.shape());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = a.value(xs[i]);
    return out;
}

Tensor derivative_elementwise(const Activation& a, const Tensor& xs) {
    Tensor out(xs.shape());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = a.derivative(xs[i]);
    return out;
}

RichardsParams canonical_richards(const Activation& a) {
    const auto make = [](double alpha, double beta) {
        return RichardsParams{.A = 0.0, .K = 1.0, .B = beta, .nu = 1.0 / alpha, .Q = 1.0, .C = 1.0};
    };
    return std::visit(
        Overloaded{
            [&](const Swish& s) { return make(1.0, s.beta); },
            [&](const Aria1& p) { return make(p.alpha, 1.0); },
            [&](const Aria2& p) { return make(p.params.alpha, p.params.beta); },
            [](const AriaFull& p) { return p.params; },
            [](const auto&) -> RichardsParams {
                throw Unsupported("activation has no Richard's-curve parameterization");
            },
        },
        a.kind());
}

}  // namespace aria
