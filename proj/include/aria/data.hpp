#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aria/activation.hpp"
#include "aria/tensor.hpp"

namespace aria {

struct Dataset {
    Tensor images;  // (n, features) or (n, c, h, w)
    std::vector<std::size_t> labels;
    std::size_t num_classes = 0;
    std::string split_name;

    std::size_t size() const noexcept { return labels.size(); }
    /// Rows in the given order.
    Dataset select(std::span<const std::size_t> indices) const;
};

/// Throws InvalidSize / LabelOutOfRange when the dataset invariants fail.
void validate(const Dataset& d);

// ---------------------------------------------------------------------------
// IDX (MNIST) files
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Reads a file, inflating it when it starts with the gzip magic bytes.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

/// Images as (n, 1, rows, cols) scaled by 1/255.
Tensor parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<std::size_t> parse_idx_labels(std::span<const std::uint8_t> bytes);

/// Inverse of the parsers. Image values are mapped back with round(255 v).
std::vector<std::uint8_t> encode_idx_images(const Tensor& images);
std::vector<std::uint8_t> encode_idx_labels(std::span<const std::size_t> labels);

/// Throws BadMagic, TruncatedFile, CountMismatch, LabelOutOfRange or IoError.
Dataset load_mnist_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path);

// ---------------------------------------------------------------------------
// Sampling and synthetic data
// ---------------------------------------------------------------------------

/// Deterministic label-stratified sample of n rows, returned in shuffled order.
/// Classes are filled round-robin so per-class counts differ by at most one
/// wherever supply allows. Throws InvalidSize unless 1 <= n <= |d|.
Dataset subset(const Dataset& d, std::size_t n, std::uint64_t seed);
std::vector<std::size_t> subset_indices(const Dataset& d, std::size_t n, std::uint64_t seed);

/// Two interleaved half circles: class 0 on the unit upper half circle,
/// class 1 on the lower one shifted by (1, 0.5). Angles are uniform and each
/// coordinate gets N(0, noise^2). Throws InvalidSize for odd or zero n.
Dataset make_two_moons(std::size_t n, double noise, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct EpochMetrics {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double test_accuracy = 0.0;

    friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct RunReport {
    std::string run_id;
    std::optional<Activation> activation;  // empty for a purely linear model
    std::vector<EpochMetrics> per_epoch;
    double wall_seconds = 0.0;  // informational, never written to CSV
    bool failed = false;
    std::string error;
};

/// Equality of everything except wall time.
bool same_results(const RunReport& a, const RunReport& b);

struct HyperParameters {
    std::optional<double> alpha;
    std::optional<double> beta;
};

/// alpha/beta columns: aria2 both, aria1 alpha (beta 1), swish/sigmoid beta.
HyperParameters hyper_parameters(const Activation& a);

/// Activation name for report columns; "linear" when absent.
std::string activation_name(const std::optional<Activation>& a);

/// Header `x,f,df`; x runs from x_min to x_max inclusive in `steps` points.
std::string curve_csv(const Activation& a, double x_min, double x_max, std::size_t steps);
void write_curve_csv(const Activation& a, double x_min, double x_max, std::size_t steps,
                     const std::filesystem::path& path);

/// One row per epoch of a single run.
std::string report_csv(const RunReport& report);
void write_report_csv(const RunReport& report, const std::filesystem::path& path);

inline const std::vector<std::size_t> kDefaultCheckpoints{10, 25, 50, 100};

/// One row per run, ReLU first then ascending (alpha, beta). Checkpoint
/// columns are kept only where some run reached that epoch.
std::string sweep_csv(std::vector<RunReport> reports,
                      const std::vector<std::size_t>& checkpoints = kDefaultCheckpoints);
void write_sweep_csv(const std::vector<RunReport>& reports, const std::filesystem::path& path,
                     const std::vector<std::size_t>& checkpoints = kDefaultCheckpoints);

/// Writes text to a file, throwing IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace aria
