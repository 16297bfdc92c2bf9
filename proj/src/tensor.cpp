#include "aria/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "aria/errors.hpp"

namespace aria {

std::size_t element_count(const Shape& shape) noexcept {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

std::string to_string(const Shape& shape) {
    std::string out = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(shape[i]);
    }
    return out + ")";
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (element_count(shape_) != data_.size()) {
        throw ShapeMismatch("tensor shape " + to_string(shape_) + " does not hold " +
                            std::to_string(data_.size()) + " elements");
    }
}

std::size_t Tensor::row_size() const noexcept {
    if (shape_.empty() || shape_[0] == 0) return 0;
    return data_.size() / shape_[0];
}

std::span<double> Tensor::row(std::size_t i) noexcept {
    const std::size_t n = row_size();
    return std::span<double>(data_).subspan(i * n, n);
}

std::span<const double> Tensor::row(std::size_t i) const noexcept {
    const std::size_t n = row_size();
    return std::span<const double>(data_).subspan(i * n, n);
}

void Tensor::reshape(Shape shape) {
    if (element_count(shape) != data_.size()) {
        throw ShapeMismatch("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
    }
    shape_ = std::move(shape);
}

void Tensor::fill(double v) noexcept { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor Tensor::gather_rows(std::span<const std::size_t> indices) const {
    Shape shape = shape_;
    shape.at(0) = indices.size();
    Tensor out(std::move(shape));
    const std::size_t n = row_size();
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= shape_[0]) throw InvalidSize("row index out of range");
        auto src = row(indices[i]);
        std::copy(src.begin(), src.end(), out.data_.begin() + static_cast<std::ptrdiff_t>(i * n));
    }
    return out;
}

}  // namespace aria
