#pragma once

// Hyper-parameter sweeps: one training run per activation on a shared
// dataset, run in parallel, reported in grid order.

#include <functional>
#include <string>
#include <vector>

#include "aria/config.hpp"

namespace aria::sweep {

struct Point {
    std::string run_id;
    Activation activation;
};

/// Grid order: relu, swish(1), then alphas x betas (alpha-major), then extra points.
std::vector<Point> points(const config::SweepConfig& cfg);

using ProgressFn = std::function<void(const std::string& run_id, const EpochMetrics&)>;

/// Trains one model; any exception becomes a failed report instead of propagating.
RunReport run_point(const nn::ModelSpec& spec, const nn::TrainConfig& train,
                    const config::LoadedData& data, const std::string& run_id,
                    const ProgressFn& progress = {});

/// Runs every point on up to `jobs` threads. Reports come back in grid order
/// and do not depend on `jobs`. `progress` is called under a lock.
std::vector<RunReport> run(const config::SweepConfig& cfg, const config::LoadedData& data,
                           std::size_t jobs, const ProgressFn& progress = {});

}  // namespace aria::sweep
