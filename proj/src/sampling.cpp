#include <cmath>
#include <numbers>
#include <numeric>

#include "aria/data.hpp"
#include "aria/errors.hpp"
#include "aria/rng.hpp"

namespace aria {

Dataset Dataset::select(std::span<const std::size_t> indices) const {
    Dataset out;
    out.images = images.gather_rows(indices);
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) out.labels.push_back(labels.at(i));
    out.num_classes = num_classes;
    out.split_name = split_name;
    return out;
}

void validate(const Dataset& d) {
    if (d.images.rank() < 2 || d.images.extent(0) != d.labels.size()) {
        throw InvalidSize("dataset images " + to_string(d.images.shape()) + " do not match " +
                          std::to_string(d.labels.size()) + " labels");
    }
    for (std::size_t label : d.labels) {
        if (label >= d.num_classes) {
            throw LabelOutOfRange("label " + std::to_string(label) + " outside [0, " +
                                  std::to_string(d.num_classes) + ")");
        }
    }
}

std::vector<std::size_t> subset_indices(const Dataset& d, std::size_t n, std::uint64_t seed) {
    if (n < 1 || n > d.size()) {
        throw InvalidSize("subset size " + std::to_string(n) + " outside [1, " +
                          std::to_string(d.size()) + "]");
    }
    std::size_t classes = d.num_classes;
    for (std::size_t label : d.labels) classes = std::max(classes, label + 1);

    SplitMix64 rng(seed);
    std::vector<std::vector<std::size_t>> by_class(classes);
    for (std::size_t i = 0; i < d.size(); ++i) by_class[d.labels[i]].push_back(i);
    for (auto& members : by_class) shuffle(std::span<std::size_t>(members), rng);

    std::vector<std::size_t> chosen;
    chosen.reserve(n);
    std::vector<std::size_t> taken(classes, 0);
    while (chosen.size() < n) {
        for (std::size_t c = 0; c < classes && chosen.size() < n; ++c) {
            if (taken[c] < by_class[c].size()) chosen.push_back(by_class[c][taken[c]++]);
        }
    }
    shuffle(std::span<std::size_t>(chosen), rng);
    return chosen;
}

Dataset subset(const Dataset& d, std::size_t n, std::uint64_t seed) {
    const auto indices = subset_indices(d, n, seed);
    return d.select(indices);
}

Dataset make_two_moons(std::size_t n, double noise, std::uint64_t seed) {
    if (n == 0 || n % 2 != 0) throw InvalidSize("two-moons size must be even and positive");
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw InvalidSize("two-moons noise must be >= 0");

    SplitMix64 rng(seed);
    const std::size_t half = n / 2;
    std::vector<double> points(2 * n);
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = std::numbers::pi * rng.uniform();
        const bool lower = i >= half;
        double x = std::cos(theta);
        double y = std::sin(theta);
        if (lower) {
            x = 1.0 - x;
            y = 0.5 - y;
        }
        if (noise > 0.0) {
            x += noise * rng.normal();
            y += noise * rng.normal();
        }
        points[2 * i] = x;
        points[2 * i + 1] = y;
        labels[i] = lower ? 1 : 0;
    }

    Dataset ordered;
    ordered.images = Tensor({n, 2}, std::move(points));
    ordered.labels = std::move(labels);
    ordered.num_classes = 2;
    ordered.split_name = "two_moons";

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(std::span<std::size_t>(order), rng);
    return ordered.select(order);
}

}  // namespace aria
