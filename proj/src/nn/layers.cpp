#include "layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aria/errors.hpp"

namespace aria::nn::detail {

namespace {

void he_uniform(Tensor& w, std::size_t fan_in, SplitMix64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (double& v : w.values()) v = rng.uniform(-bound, bound);
}

// In Train mode the slope at each pre-activation is kept for backward.
void activate(const std::optional<Activation>& act, const Tensor& z, Tensor& out, Tensor& slope,
              Mode mode) {
    if (!act) {
        out = z;
        slope = Tensor();
        return;
    }
    out = Tensor(z.shape());
    if (mode == Mode::Train) {
        slope = Tensor(z.shape());
        act->evaluate(z.values(), out.values(), slope.values());
    } else {
        slope = Tensor();
        act->evaluate(z.values(), out.values());
    }
}

// grad wrt pre-activation, in place on a copy of grad_output.
Tensor activation_backward(const std::optional<Activation>& act, const Tensor& z,
                           const Tensor& slope, const Tensor& grad_output) {
    Tensor dz = grad_output;
    if (!act) return dz;
    if (slope.size() == z.size()) {
        for (std::size_t i = 0; i < z.size(); ++i) dz[i] *= slope[i];
    } else {
        for (std::size_t i = 0; i < z.size(); ++i) dz[i] *= act->derivative(z[i]);
    }
    return dz;
}

// Output x-range [lo, hi) such that ix = ox * stride + k - pad lies in [0, width).
void valid_range(std::size_t k, std::size_t pad, std::size_t stride, std::size_t width,
                 std::size_t out_width, std::size_t& lo, std::size_t& hi) {
    // ox * stride >= pad - k
    lo = 0;
    if (pad > k) lo = (pad - k + stride - 1) / stride;
    // ox * stride + k - pad <= width - 1
    const std::ptrdiff_t limit = static_cast<std::ptrdiff_t>(width) - 1 +
                                 static_cast<std::ptrdiff_t>(pad) - static_cast<std::ptrdiff_t>(k);
    if (limit < 0) {
        hi = lo;
        return;
    }
    hi = std::min(out_width, static_cast<std::size_t>(limit) / stride + 1);
    if (hi < lo) hi = lo;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dense
// ---------------------------------------------------------------------------

DenseLayer::DenseLayer(const DenseSpec& spec, SplitMix64& init_rng)
    : spec_(spec),
      weights_({spec.out, spec.in}),
      bias_({spec.out}),
      grad_weights_({spec.out, spec.in}),
      grad_bias_({spec.out}) {
    he_uniform(weights_, spec.in, init_rng);
}

Tensor DenseLayer::forward(const Tensor& input, Mode mode, SplitMix64&) {
    const std::size_t n = input.extent(0);
    const std::size_t in = spec_.in;
    const std::size_t out = spec_.out;
    input_ = input;
    pre_activation_ = Tensor({n, out});
    const double* x = input.data();
    const double* w = weights_.data();
    double* z = pre_activation_.data();
    for (std::size_t s = 0; s < n; ++s) {
        const double* xs = x + s * in;
        for (std::size_t o = 0; o < out; ++o) {
            const double* wo = w + o * in;
            double acc = 0.0;
            for (std::size_t i = 0; i < in; ++i) acc += wo[i] * xs[i];
            z[s * out + o] = acc + bias_[o];
        }
    }
    Tensor result;
    activate(spec_.activation, pre_activation_, result, slope_, mode);
    return result;
}

Tensor DenseLayer::backward(const Tensor& grad_output) {
    const std::size_t n = input_.extent(0);
    const std::size_t in = spec_.in;
    const std::size_t out = spec_.out;
    const Tensor dz = activation_backward(spec_.activation, pre_activation_, slope_, grad_output);
    Tensor grad_input({n, in});
    const double* x = input_.data();
    const double* w = weights_.data();
    double* gw = grad_weights_.data();
    double* gx = grad_input.data();
    for (std::size_t s = 0; s < n; ++s) {
        const double* xs = x + s * in;
        double* gxs = gx + s * in;
        for (std::size_t o = 0; o < out; ++o) {
            const double d = dz[s * out + o];
            if (d == 0.0) continue;
            grad_bias_[o] += d;
            double* gwo = gw + o * in;
            const double* wo = w + o * in;
            for (std::size_t i = 0; i < in; ++i) {
                gwo[i] += d * xs[i];
                gxs[i] += d * wo[i];
            }
        }
    }
    return grad_input;
}

// ---------------------------------------------------------------------------
// Conv2D (direct)
// ---------------------------------------------------------------------------

Conv2DLayer::Conv2DLayer(const Conv2DSpec& spec, SplitMix64& init_rng)
    : spec_(spec),
      weights_({spec.out_channels, spec.in_channels, spec.kernel_h, spec.kernel_w}),
      bias_({spec.out_channels}),
      grad_weights_(weights_.shape()),
      grad_bias_({spec.out_channels}) {
    he_uniform(weights_, spec.in_channels * spec.kernel_h * spec.kernel_w, init_rng);
}

Tensor Conv2DLayer::forward(const Tensor& input, Mode mode, SplitMix64&) {
    const std::size_t n = input.extent(0);
    const std::size_t ic_n = spec_.in_channels;
    const std::size_t oc_n = spec_.out_channels;
    const std::size_t h = input.extent(2);
    const std::size_t w = input.extent(3);
    const std::size_t kh = spec_.kernel_h;
    const std::size_t kw = spec_.kernel_w;
    const std::size_t s = spec_.stride;
    const std::size_t p = spec_.padding;
    const std::size_t oh = (h + 2 * p - kh) / s + 1;
    const std::size_t ow = (w + 2 * p - kw) / s + 1;

    input_ = input;
    pre_activation_ = Tensor({n, oc_n, oh, ow});
    const double* x = input.data();
    const double* wt = weights_.data();
    double* z = pre_activation_.data();

    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t oc = 0; oc < oc_n; ++oc) {
            double* plane = z + (b * oc_n + oc) * oh * ow;
            std::fill(plane, plane + oh * ow, bias_[oc]);
            for (std::size_t ic = 0; ic < ic_n; ++ic) {
                const double* src = x + (b * ic_n + ic) * h * w;
                for (std::size_t ky = 0; ky < kh; ++ky) {
                    std::size_t oy_lo, oy_hi;
                    valid_range(ky, p, s, h, oh, oy_lo, oy_hi);
                    for (std::size_t kx = 0; kx < kw; ++kx) {
                        std::size_t ox_lo, ox_hi;
                        valid_range(kx, p, s, w, ow, ox_lo, ox_hi);
                        const double wv = wt[((oc * ic_n + ic) * kh + ky) * kw + kx];
                        for (std::size_t oy = oy_lo; oy < oy_hi; ++oy) {
                            const double* row = src + (oy * s + ky - p) * w;
                            double* dst = plane + oy * ow;
                            std::size_t ix = ox_lo * s + kx - p;
                            for (std::size_t ox = ox_lo; ox < ox_hi; ++ox, ix += s) dst[ox] += wv * row[ix];
                        }
                    }
                }
            }
        }
    }
    Tensor result;
    activate(spec_.activation, pre_activation_, result, slope_, mode);
    return result;
}

Tensor Conv2DLayer::backward(const Tensor& grad_output) {
    const std::size_t n = input_.extent(0);
    const std::size_t ic_n = spec_.in_channels;
    const std::size_t oc_n = spec_.out_channels;
    const std::size_t h = input_.extent(2);
    const std::size_t w = input_.extent(3);
    const std::size_t kh = spec_.kernel_h;
    const std::size_t kw = spec_.kernel_w;
    const std::size_t s = spec_.stride;
    const std::size_t p = spec_.padding;
    const std::size_t oh = pre_activation_.extent(2);
    const std::size_t ow = pre_activation_.extent(3);

    const Tensor dz = activation_backward(spec_.activation, pre_activation_, slope_, grad_output);
    Tensor grad_input(input_.shape());
    const double* x = input_.data();
    const double* wt = weights_.data();
    double* gw = grad_weights_.data();
    double* gx = grad_input.data();

    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t oc = 0; oc < oc_n; ++oc) {
            const double* dplane = dz.data() + (b * oc_n + oc) * oh * ow;
            double bsum = 0.0;
            for (std::size_t i = 0; i < oh * ow; ++i) bsum += dplane[i];
            grad_bias_[oc] += bsum;
            for (std::size_t ic = 0; ic < ic_n; ++ic) {
                const double* src = x + (b * ic_n + ic) * h * w;
                double* gsrc = gx + (b * ic_n + ic) * h * w;
                for (std::size_t ky = 0; ky < kh; ++ky) {
                    std::size_t oy_lo, oy_hi;
                    valid_range(ky, p, s, h, oh, oy_lo, oy_hi);
                    for (std::size_t kx = 0; kx < kw; ++kx) {
                        std::size_t ox_lo, ox_hi;
                        valid_range(kx, p, s, w, ow, ox_lo, ox_hi);
                        const std::size_t widx = ((oc * ic_n + ic) * kh + ky) * kw + kx;
                        const double wv = wt[widx];
                        double acc = 0.0;
                        for (std::size_t oy = oy_lo; oy < oy_hi; ++oy) {
                            const std::size_t offset = (oy * s + ky - p) * w;
                            const double* row = src + offset;
                            double* grow = gsrc + offset;
                            const double* drow = dplane + oy * ow;
                            std::size_t ix = ox_lo * s + kx - p;
                            for (std::size_t ox = ox_lo; ox < ox_hi; ++ox, ix += s) {
                                acc += drow[ox] * row[ix];
                                grow[ix] += wv * drow[ox];
                            }
                        }
                        gw[widx] += acc;
                    }
                }
            }
        }
    }
    return grad_input;
}

// ---------------------------------------------------------------------------
// MaxPool2D
// ---------------------------------------------------------------------------

Tensor MaxPool2DLayer::forward(const Tensor& input, Mode, SplitMix64&) {
    const std::size_t n = input.extent(0);
    const std::size_t c = input.extent(1);
    const std::size_t h = input.extent(2);
    const std::size_t w = input.extent(3);
    const std::size_t k = spec_.window;
    const std::size_t s = spec_.stride;
    const std::size_t oh = (h - k) / s + 1;
    const std::size_t ow = (w - k) / s + 1;

    input_shape_ = input.shape();
    Tensor out({n, c, oh, ow});
    argmax_.assign(out.size(), 0);
    std::size_t o = 0;
    for (std::size_t plane = 0; plane < n * c; ++plane) {
        const std::size_t base = plane * h * w;
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox, ++o) {
                double best = -std::numeric_limits<double>::infinity();
                std::size_t best_idx = base + oy * s * w + ox * s;
                for (std::size_t ky = 0; ky < k; ++ky) {
                    for (std::size_t kx = 0; kx < k; ++kx) {
                        const std::size_t idx = base + (oy * s + ky) * w + ox * s + kx;
                        if (input[idx] > best) {
                            best = input[idx];
                            best_idx = idx;
                        }
                    }
                }
                out[o] = best;
                argmax_[o] = best_idx;
            }
        }
    }
    return out;
}

Tensor MaxPool2DLayer::backward(const Tensor& grad_output) {
    Tensor grad_input(input_shape_);
    for (std::size_t o = 0; o < grad_output.size(); ++o) grad_input[argmax_[o]] += grad_output[o];
    return grad_input;
}

// ---------------------------------------------------------------------------
// Dropout (inverted)
// ---------------------------------------------------------------------------

Tensor DropoutLayer::forward(const Tensor& input, Mode mode, SplitMix64& dropout_rng) {
    if (mode == Mode::Eval || spec_.rate == 0.0) {
        mask_.clear();
        return input;
    }
    const double keep_scale = 1.0 / (1.0 - spec_.rate);
    mask_.resize(input.size());
    Tensor out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) {
        mask_[i] = dropout_rng.uniform() < spec_.rate ? 0.0 : keep_scale;
        out[i] = input[i] * mask_[i];
    }
    return out;
}

Tensor DropoutLayer::backward(const Tensor& grad_output) {
    if (mask_.empty()) return grad_output;
    Tensor grad_input(grad_output.shape());
    for (std::size_t i = 0; i < grad_output.size(); ++i) grad_input[i] = grad_output[i] * mask_[i];
    return grad_input;
}

// ---------------------------------------------------------------------------
// Flatten
// ---------------------------------------------------------------------------

Tensor FlattenLayer::forward(const Tensor& input, Mode, SplitMix64&) {
    input_shape_ = input.shape();
    Tensor out = input;
    out.reshape({input.extent(0), input.row_size()});
    return out;
}

Tensor FlattenLayer::backward(const Tensor& grad_output) {
    Tensor grad_input = grad_output;
    grad_input.reshape(input_shape_);
    return grad_input;
}

}  // namespace aria::nn::detail
