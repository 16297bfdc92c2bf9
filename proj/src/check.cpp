#include "aria/check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aria/format.hpp"
#include "aria/rng.hpp"

namespace aria::check {

namespace {

class Tracker {
public:
    Tracker(std::string name, std::string summary) {
        result_.name = std::move(name);
        result_.summary = std::move(summary);
    }

    // Records an error measure against its bound.
    void measure(double error, double bound, const Violation& where) {
        if (std::isnan(error)) error = std::numeric_limits<double>::infinity();
        result_.worst_error = std::max(result_.worst_error, error);
        if (!(error <= bound)) fail(where);
    }

    void require(bool ok, const Violation& where) {
        if (!ok) fail(where);
    }

    PropertyResult done() && { return std::move(result_); }

private:
    void fail(const Violation& where) {
        if (result_.passed) result_.violation = where;
        result_.passed = false;
    }

    PropertyResult result_;
};

double relative_error(double a, double b) {
    if (a == b) return 0.0;
    return std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b));
}

DerivativeFn derivative_of(const Options& opt) {
    if (opt.derivative) return opt.derivative;
    return [](const Aria2Params& p, double x) { return aria2_derivative(p, x); };
}

}  // namespace

std::vector<double> symmetric_grid(std::size_t n) {
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = i + 1 == n ? 20.0 : -20.0 + 40.0 * (static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return xs;
}

double central_difference(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

PropertyResult gradient_check(const Options& opt) {
    const auto xs = symmetric_grid(opt.grid_points);
    const auto deriv = derivative_of(opt);
    Tracker t("gradient-check", "16 (alpha,beta) x " + std::to_string(xs.size()) +
                                    " points, h=1e-6, tol 1e-6");
    for (double alpha : kAlphaGrid) {
        for (double beta : kBetaGrid) {
            const Aria2Params p{alpha, beta};
            const auto f = [&](double x) { return aria2(p, x); };
            for (double x : xs) {
                const double analytic = deriv(p, x);
                const double numeric = central_difference(f, x, 1e-6);
                const double err = std::fabs(analytic - numeric) / std::max(1.0, std::fabs(analytic));
                t.measure(err, 1e-6, {alpha, beta, x, analytic, numeric});
            }
        }
    }
    return std::move(t).done();
}

PropertyResult swish_identity(const Options& opt) {
    const auto xs = symmetric_grid(opt.grid_points);
    Tracker t("swish-identity", "aria2(1,beta) == swish(beta) bitwise, value and derivative");
    for (double beta : {0.0, 0.1, 1.0, 2.0, 10.0, 1000.0}) {
        const Activation a2 = Activation::aria2(1.0, beta);
        const Activation sw = Activation::swish(beta);
        for (double x : xs) {
            t.require(aria2({1.0, beta}, x) == swish(beta, x), {1.0, beta, x, aria2({1.0, beta}, x), swish(beta, x)});
            t.require(a2.value(x) == sw.value(x) && a2.derivative(x) == sw.derivative(x),
                      {1.0, beta, x, a2.derivative(x), sw.derivative(x)});
        }
    }
    return std::move(t).done();
}

PropertyResult richards_reduction(const Options& opt) {
    const auto xs = symmetric_grid(opt.grid_points);
    Tracker t("richards-reduction", "aria(canonical params) vs aria2, rel tol 1e-12");
    for (double alpha : kAlphaGrid) {
        for (double beta : kBetaGrid) {
            const Aria2Params p{alpha, beta};
            const RichardsParams r = canonical_richards(Activation::aria2(alpha, beta));
            for (double x : xs) {
                const double direct = aria2(p, x);
                const double via = aria(r, x);
                t.measure(relative_error(direct, via), 1e-12, {alpha, beta, x, via, direct});
            }
        }
    }
    return std::move(t).done();
}

PropertyResult power_identity(const Options& opt) {
    const auto xs = symmetric_grid(opt.grid_points);
    Tracker t("power-identity", "(1+e^{-bx})^{-a} vs sigmoid(1,bx)^a, rel tol 1e-12");
    for (double alpha : kAlphaGrid) {
        for (double beta : kBetaGrid) {
            for (double x : xs) {
                const double s = sigmoid(1.0, beta * x);
                if (s < std::numeric_limits<double>::min()) continue;
                const double expected = std::pow(s, alpha);
                const double gate = aria2_gate({alpha, beta}, x);
                t.measure(relative_error(gate, expected), 1e-12, {alpha, beta, x, gate, expected});
            }
        }
    }
    return std::move(t).done();
}

PropertyResult relu_limit(const Options&) {
    Tracker t("relu-limit", "max |aria2(1,1000,x) - relu(x)| over |x| in [0.1,10], tol 1e-6");
    for (int i = -100; i <= 100; ++i) {
        if (i == 0) continue;
        const double x = static_cast<double>(i) / 10.0;
        const double v = aria2({1.0, 1000.0}, x);
        t.measure(std::fabs(v - relu(x)), 1e-6, {1.0, 1000.0, x, v, relu(x)});
    }
    return std::move(t).done();
}

// Strict bounds are checked where they are representable in binary64
// (|beta x| <= 30); elsewhere the gate may round to exactly 0 or 1.
PropertyResult boundedness_sign(const Options& opt) {
    const auto xs = symmetric_grid(opt.grid_points);
    Tracker t("boundedness-sign", "0 < gate < 1 and aria2 between 0 and x");
    for (double alpha : kAlphaGrid) {
        for (double beta : kBetaGrid) {
            const Aria2Params p{alpha, beta};
            for (double x : xs) {
                const double g = aria2_gate(p, x);
                const double v = aria2(p, x);
                const Violation where{alpha, beta, x, v, x};
                t.require(g >= 0.0 && g <= 1.0, where);
                t.require(std::fabs(v) <= std::fabs(x), where);
                t.require(v == 0.0 || std::signbit(v) == std::signbit(x), where);
                if (std::fabs(beta * x) <= 30.0) {
                    t.require(g > 0.0 && g < 1.0, where);
                    if (x > 0.0) t.require(v > 0.0 && v < x, where);
                    if (x < 0.0) t.require(v < 0.0 && v > x, where);
                }
            }
        }
    }
    return std::move(t).done();
}

PropertyResult non_monotonicity(const Options& opt) {
    const auto xs = symmetric_grid(opt.grid_points);
    const auto deriv = derivative_of(opt);
    const Aria2Params p{1.0, 1.0};
    Tracker t("non-monotonicity", "aria2(1,1) dips below 0 for x<0; relu' >= 0");

    const double at_minus3 = deriv(p, -3.0);
    const double fd = central_difference([&](double x) { return aria2(p, x); }, -3.0);
    t.require(at_minus3 < 0.0, {1.0, 1.0, -3.0, at_minus3, fd});
    t.measure(std::fabs(at_minus3 - fd), 1e-6, {1.0, 1.0, -3.0, at_minus3, fd});

    double minimum = 0.0;
    double argmin = 0.0;
    for (double x : xs) {
        if (x >= 0.0) break;
        const double v = aria2(p, x);
        if (v < minimum) {
            minimum = v;
            argmin = x;
        }
    }
    t.require(minimum < 0.0 && argmin < 0.0, {1.0, 1.0, argmin, minimum, 0.0});
    for (double x : xs) t.require(relu_derivative(x) >= 0.0, {0.0, 0.0, x, relu_derivative(x), 0.0});
    return std::move(t).done();
}

PropertyResult stability(const Options& opt) {
    Tracker t("stability", std::to_string(opt.fuzz_samples) +
                               " samples x in [-1e4,1e4], alpha in (0,4], beta in [0,100]");
    const auto deriv = derivative_of(opt);
    SplitMix64 rng(opt.fuzz_seed);
    const auto probe = [&](double alpha, double beta, double x) {
        const Aria2Params p{alpha, beta};
        const RichardsParams r{.A = 0.0, .K = 1.0, .B = beta, .nu = 1.0 / alpha, .Q = 1.0, .C = 1.0};
        const double values[] = {aria2(p, x),          deriv(p, x),       sigmoid(beta, x),
                                 sigmoid_derivative(beta, x), richards_sigma(r, x), aria_derivative(r, x)};
        for (double v : values) t.require(std::isfinite(v), {alpha, beta, x, v, 0.0});
    };
    for (double x : {-1e4, -709.0, -1.0, 0.0, 1.0, 709.0, 1e4}) {
        for (double alpha : {1e-300, 1e-3, 1.0, 4.0}) {
            for (double beta : {0.0, 1e-3, 1.0, 100.0}) probe(alpha, beta, x);
        }
    }
    for (std::size_t i = 0; i < opt.fuzz_samples; ++i) {
        const double x = rng.uniform(-1e4, 1e4);
        const double alpha = 4.0 * (1.0 - rng.uniform());  // (0, 4]
        const double beta = rng.uniform(0.0, 100.0);
        probe(alpha, beta, x);
    }
    return std::move(t).done();
}

PropertyResult richards_asymptotes(const Options&) {
    Tracker t("richards-asymptotes", "C=1, Q>0, B>0: sigma(+-50/B) within 1e-10 of K and A");
    const RichardsParams cases[] = {
        {.A = 0.0, .K = 1.0, .B = 1.0, .nu = 1.0, .Q = 1.0, .C = 1.0},
        {.A = -0.5, .K = 2.0, .B = 2.0, .nu = 0.5, .Q = 2.0, .C = 1.0},
        {.A = 0.2, .K = 3.0, .B = 0.5, .nu = 2.0, .Q = 0.5, .C = 1.0},
        {.A = 1.0, .K = -1.0, .B = 10.0, .nu = 1.5, .Q = 1.0, .C = 1.0},
        {.A = 0.0, .K = 1.0, .B = 0.1, .nu = 0.25, .Q = 3.0, .C = 1.0},
    };
    for (const RichardsParams& p : cases) {
        const double hi = richards_sigma(p, 50.0 / p.B);
        const double lo = richards_sigma(p, -50.0 / p.B);
        t.measure(std::fabs(hi - p.K), 1e-10, {1.0 / p.nu, p.B, 50.0 / p.B, hi, p.K});
        t.measure(std::fabs(lo - p.A), 1e-10, {1.0 / p.nu, p.B, -50.0 / p.B, lo, p.A});
    }
    return std::move(t).done();
}

std::vector<PropertyResult> run_all(const Options& opt) {
    return {gradient_check(opt), swish_identity(opt),   richards_reduction(opt),
            power_identity(opt), relu_limit(opt),       boundedness_sign(opt),
            non_monotonicity(opt), stability(opt),      richards_asymptotes(opt)};
}

std::string format_result(const PropertyResult& r) {
    std::string line = (r.passed ? "PASS " : "FAIL ") + r.name + ": " + r.summary +
                       " (worst error " + format_double(r.worst_error) + ")";
    if (r.violation) {
        const Violation& v = *r.violation;
        line += " at (alpha=" + format_double(v.alpha) + ", beta=" + format_double(v.beta) +
                ", x=" + format_double(v.x) + "): observed " + format_double(v.observed) +
                ", expected " + format_double(v.expected);
    }
    return line;
}

}  // namespace aria::check
