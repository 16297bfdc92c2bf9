#include "aria/sweep.hpp"

#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include "aria/format.hpp"
#include "aria/train.hpp"

namespace aria::sweep {

std::vector<Point> points(const config::SweepConfig& cfg) {
    std::vector<Point> out;
    if (cfg.include_relu) out.push_back({"relu", Activation::relu()});
    if (cfg.include_swish_beta1) out.push_back({"swish_b1", Activation::swish(1.0)});
    const auto add = [&](double alpha, double beta) {
        out.push_back({"aria2_a" + format_double(alpha) + "_b" + format_double(beta),
                       Activation::aria2(alpha, beta)});
    };
    for (double alpha : cfg.alphas) {
        for (double beta : cfg.betas) add(alpha, beta);
    }
    for (const auto& [alpha, beta] : cfg.extra_points) add(alpha, beta);
    return out;
}

RunReport run_point(const nn::ModelSpec& spec, const nn::TrainConfig& train,
                    const config::LoadedData& data, const std::string& run_id,
                    const ProgressFn& progress) {
    const auto start = std::chrono::steady_clock::now();
    try {
        nn::Model model = nn::build_model(spec);
        nn::EpochCallback cb;
        if (progress) cb = [&](const EpochMetrics& m) { progress(run_id, m); };
        return nn::train(model, data.train, data.test, train, run_id, cb);
    } catch (const std::exception& e) {
        RunReport r;
        r.run_id = run_id;
        r.activation = nn::primary_activation(spec);
        r.failed = true;
        r.error = e.what();
        r.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return r;
    }
}

std::vector<RunReport> run(const config::SweepConfig& cfg, const config::LoadedData& data,
                           std::size_t jobs, const ProgressFn& progress) {
    const std::vector<Point> grid = points(cfg);
    std::vector<RunReport> reports(grid.size());
    std::atomic<std::size_t> next{0};
    std::mutex lock;
    ProgressFn locked;
    if (progress) {
        locked = [&](const std::string& id, const EpochMetrics& m) {
            std::lock_guard guard(lock);
            progress(id, m);
        };
    }
    const auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            const nn::ModelSpec spec = nn::with_activation(cfg.model, grid[i].activation);
            reports[i] = run_point(spec, cfg.train, data, grid[i].run_id, locked);
        }
    };
    jobs = std::max<std::size_t>(1, std::min(jobs, grid.size()));
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < jobs; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    return reports;
}

}  // namespace aria::sweep
