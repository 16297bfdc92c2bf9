#pragma once

// Activation family built around Richard's generalized logistic curve.
//
//   richards(x) = A + (K - A) / (C + Q e^{-Bx})^{1/nu}
//   aria(x)     = x * richards(x)
//   aria2(x)    = x * (1 + e^{-beta x})^{-alpha}      (A=0, K=1, Q=1, C=1, B=beta, nu=1/alpha)
//   swish(x)    = aria2 with alpha = 1
//
// All kernels are evaluated in the log domain so that no intermediate
// exponential can overflow for finite inputs.

#include <span>
#include <string>
#include <variant>

namespace aria {

class Tensor;

struct RichardsParams {
    double A = 0.0;   // lower asymptote
    double K = 1.0;   // upper asymptote
    double B = 1.0;   // growth rate
    double nu = 1.0;  // growth-direction exponent, > 0
    double Q = 1.0;   // initial-value parameter, >= 0
    double C = 1.0;   // additive constant, > 0

    friend bool operator==(const RichardsParams&, const RichardsParams&) = default;
};

struct Aria2Params {
    double alpha = 1.0;  // > 0
    double beta = 1.0;   // >= 0

    friend bool operator==(const Aria2Params&, const Aria2Params&) = default;
};

/// Throws InvalidParams when the parameters violate the curve's domain.
void validate(const RichardsParams& p);
void validate(const Aria2Params& p);

// ---------------------------------------------------------------------------
// Stable primitives
// ---------------------------------------------------------------------------

/// log(1 + e^t) without overflow.
double softplus(double t) noexcept;

/// 1 / (1 + e^{-t}) without overflow.
double logistic(double t) noexcept;

// ---------------------------------------------------------------------------
// Scalar activations. Functions taking parameter records validate them and
// throw InvalidParams; the Activation class validates once at construction.
// ---------------------------------------------------------------------------

double relu(double x) noexcept;
double relu_derivative(double x) noexcept;

double sigmoid(double beta, double x);
double sigmoid_derivative(double beta, double x);

double richards_sigma(const RichardsParams& p, double x);
double aria(const RichardsParams& p, double x);
double aria_derivative(const RichardsParams& p, double x);

/// (1 + e^{-beta x})^{-alpha}
double aria2_gate(const Aria2Params& p, double x);
double aria2(const Aria2Params& p, double x);
double aria2_derivative(const Aria2Params& p, double x);

double swish(double beta, double x);
double swish_derivative(double beta, double x);

// ---------------------------------------------------------------------------
// Activation catalog
// ---------------------------------------------------------------------------

struct Relu {
    friend bool operator==(const Relu&, const Relu&) = default;
};
struct Sigmoid {
    double beta = 1.0;
    friend bool operator==(const Sigmoid&, const Sigmoid&) = default;
};
struct Swish {
    double beta = 1.0;
    friend bool operator==(const Swish&, const Swish&) = default;
};
/// ARiA2 with beta fixed at 1.
struct Aria1 {
    double alpha = 1.0;
    friend bool operator==(const Aria1&, const Aria1&) = default;
};
struct Aria2 {
    Aria2Params params;
    friend bool operator==(const Aria2&, const Aria2&) = default;
};
struct AriaFull {
    RichardsParams params;
    friend bool operator==(const AriaFull&, const AriaFull&) = default;
};

using ActivationKind = std::variant<Relu, Sigmoid, Swish, Aria1, Aria2, AriaFull>;

/// A validated member of the activation family. Construction checks the
/// embedded parameters; evaluation afterwards performs no validation.
class Activation {
public:
    explicit Activation(ActivationKind kind);

    static Activation relu() { return Activation(Relu{}); }
    static Activation sigmoid(double beta = 1.0) { return Activation(Sigmoid{beta}); }
    static Activation swish(double beta) { return Activation(Swish{beta}); }
    static Activation aria1(double alpha) { return Activation(Aria1{alpha}); }
    static Activation aria2(double alpha, double beta) { return Activation(Aria2{{alpha, beta}}); }
    static Activation aria_full(const RichardsParams& p) { return Activation(AriaFull{p}); }

    double value(double x) const noexcept;
    double derivative(double x) const noexcept;

    /// Batched evaluation: f[i] = value(x[i]) and, unless df is empty,
    /// df[i] = derivative(x[i]), both bitwise equal to the scalar calls.
    /// Shared terms are computed once per element.
    void evaluate(std::span<const double> x, std::span<double> f,
                  std::span<double> df = {}) const noexcept;

    const ActivationKind& kind() const noexcept { return kind_; }

    /// Short machine-friendly name: relu, sigmoid, swish, aria1, aria2, aria.
    std::string name() const;
    /// Human-readable label including hyper-parameters, e.g. "aria2(alpha=1.5,beta=2)".
    std::string label() const;

    friend bool operator==(const Activation&, const Activation&) = default;

private:
    ActivationKind kind_;
};

double derivative(const Activation& a, double x) noexcept;

/// Applies the activation to every element; shape is preserved.
Tensor apply_elementwise(const Activation& a, const Tensor& xs);
Tensor derivative_elementwise(const Activation& a, const Tensor& xs);

/// Richard's-curve parameters reproducing Swish, Aria1 or Aria2 exactly:
/// {A:0, K:1, B:beta, nu:1/alpha, Q:1, C:1}. Throws Unsupported otherwise.
RichardsParams canonical_richards(const Activation& a);

}  // namespace aria
