#include "aria/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "aria/errors.hpp"
#include "aria/format.hpp"

namespace aria::nn {

std::optional<Activation> primary_activation(const ModelSpec& spec) {
    for (const LayerSpec& layer : spec.layers) {
        if (const auto* d = std::get_if<DenseSpec>(&layer); d && d->activation) return d->activation;
        if (const auto* c = std::get_if<Conv2DSpec>(&layer); c && c->activation) return c->activation;
    }
    return std::nullopt;
}

double evaluate(Model& m, const Dataset& data, std::size_t chunk) {
    if (data.size() == 0) throw InvalidSize("cannot evaluate on an empty dataset");
    std::size_t correct = 0;
    std::vector<std::size_t> indices;
    for (std::size_t start = 0; start < data.size(); start += chunk) {
        const std::size_t end = std::min(data.size(), start + chunk);
        indices.resize(end - start);
        std::iota(indices.begin(), indices.end(), start);
        const Tensor probs = forward(m, data.images.gather_rows(indices), Mode::Eval);
        const std::span<const std::size_t> labels(data.labels.data() + start, end - start);
        correct += correct_predictions(probs, labels);
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

RunReport train(Model& m, const Dataset& train_set, const Dataset& test_set,
                const TrainConfig& cfg, const std::string& run_id, const EpochCallback& on_epoch) {
    validate(cfg);
    validate(train_set);
    validate(test_set);
    if (train_set.size() == 0 || test_set.size() == 0) {
        throw InvalidSize("training and test sets must be non-empty");
    }
    const auto started = std::chrono::steady_clock::now();

    RunReport report;
    report.run_id = run_id;
    report.activation = primary_activation(m.spec());

    Optimizer optimizer(cfg.optimizer, m);
    const std::size_t n = train_set.size();
    std::vector<std::size_t> order(n);
    std::vector<std::size_t> batch_labels;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        SplitMix64 shuffle_rng(cfg.shuffle_seed ^ static_cast<std::uint64_t>(epoch));
        shuffle(std::span<std::size_t>(order), shuffle_rng);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t end = std::min(n, start + cfg.batch_size);
            const std::span<const std::size_t> rows(order.data() + start, end - start);
            batch_labels.clear();
            for (std::size_t r : rows) batch_labels.push_back(train_set.labels[r]);

            auto step = loss_and_gradients(m, train_set.images.gather_rows(rows), batch_labels,
                                           Mode::Train);
            if (!std::isfinite(step.loss)) {
                throw Error("non-finite training loss in epoch " + std::to_string(epoch + 1));
            }
            loss_sum += step.loss * static_cast<double>(rows.size());
            optimizer.step(m, step.gradients, epoch);
        }

        EpochMetrics metrics{epoch + 1, loss_sum / static_cast<double>(n), evaluate(m, test_set)};
        report.per_epoch.push_back(metrics);
        if (on_epoch) on_epoch(metrics);
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

}  // namespace aria::nn
