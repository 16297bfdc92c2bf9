#pragma once

#include <functional>
#include <optional>
#include <string>

#include "aria/data.hpp"
#include "aria/nn.hpp"

namespace aria::nn {

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// First activation carried by any layer of the spec.
std::optional<Activation> primary_activation(const ModelSpec& spec);

/// Runs cfg.epochs passes of shuffled mini-batch training. Epoch e (0-based)
/// shuffles with SplitMix64(cfg.shuffle_seed ^ e). The report is a pure
/// function of (model state, data, cfg); only wall_seconds varies.
/// Throws Error on a non-finite training loss.
RunReport train(Model& m, const Dataset& train_set, const Dataset& test_set,
                const TrainConfig& cfg, const std::string& run_id = "run",
                const EpochCallback& on_epoch = {});

/// Fraction of samples whose argmax class (lowest index on ties) is the label.
double evaluate(Model& m, const Dataset& data, std::size_t chunk = 256);

}  // namespace aria::nn
