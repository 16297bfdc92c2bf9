#pragma once

// Executable invariant battery for the activation family: gradient checks,
// reductions between family members, limits, and stability under fuzzing.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aria/activation.hpp"

namespace aria::check {

struct Violation {
    double alpha = 0.0;
    double beta = 0.0;
    double x = 0.0;
    double observed = 0.0;
    double expected = 0.0;
};

struct PropertyResult {
    std::string name;
    bool passed = true;
    std::string summary;                 // what was checked, e.g. sample counts
    std::optional<Violation> violation;  // first offending point
    double worst_error = 0.0;
};

using DerivativeFn = std::function<double(const Aria2Params&, double)>;

struct Options {
    /// Points on [-20, 20]; 4001 gives a step of 0.01.
    std::size_t grid_points = 4001;
    std::size_t fuzz_samples = 1'000'000;
    std::uint64_t fuzz_seed = 20180531;
    /// Replaces aria2_derivative, for negative controls.
    DerivativeFn derivative;
};

/// x_i = -20 + 40 i / (n - 1). Requires n >= 2.
std::vector<double> symmetric_grid(std::size_t n);

inline const std::vector<double> kAlphaGrid{0.5, 1.0, 1.5, 2.0};
inline const std::vector<double> kBetaGrid{0.1, 1.0, 2.0, 10.0};

/// (f(x + h) - f(x - h)) / 2h
double central_difference(const std::function<double(double)>& f, double x, double h = 1e-6);

PropertyResult gradient_check(const Options& opt);
PropertyResult swish_identity(const Options& opt);
PropertyResult richards_reduction(const Options& opt);
PropertyResult power_identity(const Options& opt);
PropertyResult relu_limit(const Options& opt);
PropertyResult boundedness_sign(const Options& opt);
PropertyResult non_monotonicity(const Options& opt);
PropertyResult stability(const Options& opt);
PropertyResult richards_asymptotes(const Options& opt);

/// Every property above, in a fixed order.
std::vector<PropertyResult> run_all(const Options& opt);

/// "PASS name: summary" or "FAIL name: ... at (alpha=a, beta=b, x=x)".
std::string format_result(const PropertyResult& r);

}  // namespace aria::check
