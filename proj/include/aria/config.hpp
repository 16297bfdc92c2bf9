#pragma once

// JSON run and sweep configurations. Every validation failure throws
// ConfigError carrying the JSON path of the offending field.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "aria/data.hpp"
#include "aria/nn.hpp"

namespace aria::config {

using Json = nlohmann::json;

struct TwoMoonsSource {
    std::size_t train_size = 1000;
    std::size_t test_size = 1000;
    double noise = 0.1;
    std::uint64_t seed = 1;
    std::uint64_t test_seed = 2;
};

struct MnistSource {
    std::filesystem::path train_images;
    std::filesystem::path train_labels;
    std::filesystem::path test_images;
    std::filesystem::path test_labels;
    std::optional<std::size_t> train_subset;
    std::optional<std::size_t> test_subset;
    std::uint64_t subset_seed = 0;
};

using DatasetSource = std::variant<TwoMoonsSource, MnistSource>;

struct LoadedData {
    Dataset train;
    Dataset test;
};

LoadedData load_dataset(const DatasetSource& source);

struct RunConfig {
    std::string run_id = "run";
    nn::ModelSpec model;
    nn::TrainConfig train;
    DatasetSource dataset;
    std::optional<std::filesystem::path> output;
};

struct SweepConfig {
    std::vector<double> alphas;
    std::vector<double> betas;
    std::vector<std::pair<double, double>> extra_points;  // (alpha, beta)
    bool include_relu = true;
    bool include_swish_beta1 = false;
    nn::ModelSpec model;
    nn::TrainConfig train;
    DatasetSource dataset;
    std::optional<std::filesystem::path> output;
    std::vector<std::size_t> checkpoints = kDefaultCheckpoints;
};

/// Desk-scale CNN: two conv(3x3, pad 1) + maxpool(2) blocks, dense hidden
/// layer with dropout, linear logits and softmax.
nn::ModelSpec desk_cnn(const Activation& a, std::uint64_t seed, std::size_t dense_units = 128,
                       double dropout = 0.4, std::size_t conv1 = 8, std::size_t conv2 = 16);

/// Dense stack input -> hidden... -> classes with `a` on hidden layers.
nn::ModelSpec mlp(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t classes,
                  const Activation& a, std::uint64_t seed);

/// Reference SGD schedule {30, 60, 80} of 100 epochs, scaled to `epochs`.
std::vector<std::size_t> default_decay_epochs(std::size_t epochs);

Activation parse_activation(const Json& j, const std::string& path);
nn::ModelSpec parse_model(const Json& j, const std::string& path);
nn::TrainConfig parse_train(const Json& j, const std::string& path, std::uint64_t model_seed);
DatasetSource parse_dataset(const Json& j, const std::string& path,
                            const std::filesystem::path& base_dir);

RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir = {});
SweepConfig parse_sweep_config(const Json& j, const std::filesystem::path& base_dir = {});

/// Reads and parses a JSON file. Throws ConfigError (path "") on IO or syntax errors.
Json read_json_file(const std::filesystem::path& path);

}  // namespace aria::config
