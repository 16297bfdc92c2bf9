#include "cli.hpp"

#include <charconv>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aria/check.hpp"
#include "aria/config.hpp"
#include "aria/errors.hpp"
#include "aria/format.hpp"
#include "aria/sweep.hpp"
#include "aria/train.hpp"

namespace aria::cli {

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kUsage = 2;

double parse_number(const std::string& text, const std::string& what) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw InvalidParams(what + ": not a number \"" + text + "\"");
    return v;
}

std::vector<double> split_numbers(const std::string& text, char sep, const std::string& what) {
    std::vector<double> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        out.push_back(parse_number(text.substr(start, pos - start), what));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

struct CurveArgs {
    std::string activation;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<std::string> richards;
    std::string range = "-5:5";
    std::size_t steps = 101;
    std::string out;
};

Activation curve_activation(const CurveArgs& a) {
    const auto reject = [&](bool given, const char* flag) {
        if (given) throw InvalidParams(std::string(flag) + " does not apply to " + a.activation);
    };
    const double alpha = a.alpha.value_or(1.0);
    const double beta = a.beta.value_or(1.0);
    if (a.activation != "aria") reject(a.richards.has_value(), "--richards");
    if (a.activation == "relu") {
        reject(a.alpha.has_value(), "--alpha");
        reject(a.beta.has_value(), "--beta");
        return Activation::relu();
    }
    if (a.activation == "sigmoid" || a.activation == "swish") {
        reject(a.alpha.has_value(), "--alpha");
        return a.activation == "sigmoid" ? Activation::sigmoid(beta) : Activation::swish(beta);
    }
    if (a.activation == "aria1") {
        reject(a.beta.has_value(), "--beta");
        return Activation::aria1(alpha);
    }
    if (a.activation == "aria2") return Activation::aria2(alpha, beta);
    // aria: full Richards parameterisation
    reject(a.alpha.has_value(), "--alpha");
    reject(a.beta.has_value(), "--beta");
    RichardsParams p;
    if (a.richards) {
        const auto v = split_numbers(*a.richards, ',', "--richards");
        if (v.size() != 6) throw InvalidParams("--richards expects A,K,B,NU,Q,C");
        p = {v[0], v[1], v[2], v[3], v[4], v[5]};
    }
    return Activation::aria_full(p);
}

int run_curve(const CurveArgs& a, std::ostream& out) {
    const Activation act = curve_activation(a);
    const auto bounds = split_numbers(a.range, ':', "--range");
    if (bounds.size() != 2) throw InvalidParams("--range expects MIN:MAX");
    if (a.out.empty() || a.out == "-") {
        out << curve_csv(act, bounds[0], bounds[1], a.steps);
    } else {
        write_curve_csv(act, bounds[0], bounds[1], a.steps, a.out);
        out << "wrote " << a.steps << " points of " << act.label() << " to " << a.out << "\n";
    }
    return kOk;
}

struct CheckArgs {
    std::size_t grid_points = 4001;
    std::size_t fuzz_samples = 1'000'000;
    std::uint64_t fuzz_seed = 20180531;
    std::string inject_fault;
};

int run_check(const CheckArgs& a, std::ostream& out, std::ostream& err) {
    if (a.grid_points < 2) throw InvalidParams("--grid-density must be >= 2");
    check::Options opt;
    opt.grid_points = a.grid_points;
    opt.fuzz_samples = a.fuzz_samples;
    opt.fuzz_seed = a.fuzz_seed;
    if (a.inject_fault == "gradient") {
        opt.derivative = [](const Aria2Params& p, double x) { return aria2_derivative(p, x) + 1e-3; };
    } else if (!a.inject_fault.empty()) {
        throw InvalidParams("unknown fault \"" + a.inject_fault + "\"");
    }
    const auto results = check::run_all(opt);
    const check::PropertyResult* first_failure = nullptr;
    for (const auto& r : results) {
        out << check::format_result(r) << "\n";
        if (!r.passed && !first_failure) first_failure = &r;
    }
    if (first_failure) {
        err << "error: property " << first_failure->name << " failed";
        if (first_failure->violation) {
            const auto& v = *first_failure->violation;
            err << " at (alpha=" << format_double(v.alpha) << ", beta=" << format_double(v.beta)
                << ", x=" << format_double(v.x) << ")";
        }
        err << "\n";
        return kRuntimeFailure;
    }
    return kOk;
}

std::string epoch_line(const std::string& run_id, const EpochMetrics& m, std::size_t epochs) {
    return run_id + " epoch " + std::to_string(m.epoch) + "/" + std::to_string(epochs) +
           " train_loss=" + format_double(m.train_loss) +
           " test_accuracy=" + format_double(m.test_accuracy) + "\n";
}

int run_train(const std::string& path, const std::string& out_override, std::ostream& out) {
    const auto cfg = config::parse_run_config(config::read_json_file(path),
                                              std::filesystem::path(path).parent_path());
    const auto data = config::load_dataset(cfg.dataset);
    nn::Model model = nn::build_model(cfg.model);
    out << cfg.run_id << ": " << model.parameter_count() << " parameters, " << data.train.size()
        << " train / " << data.test.size() << " test samples\n";
    const RunReport report = nn::train(model, data.train, data.test, cfg.train, cfg.run_id,
                                       [&](const EpochMetrics& m) {
                                           out << epoch_line(cfg.run_id, m, cfg.train.epochs);
                                           out.flush();
                                       });
    const std::string dest = !out_override.empty() ? out_override
                             : cfg.output          ? cfg.output->string()
                                                   : std::string();
    if (dest.empty()) {
        out << report_csv(report);
    } else {
        write_report_csv(report, dest);
        out << "wrote " << dest << "\n";
    }
    return kOk;
}

int run_sweep(const std::string& path, std::size_t jobs, const std::string& out_override,
              std::ostream& out, std::ostream& err) {
    const auto cfg = config::parse_sweep_config(config::read_json_file(path),
                                                std::filesystem::path(path).parent_path());
    const auto data = config::load_dataset(cfg.dataset);
    const auto reports = sweep::run(cfg, data, jobs, [&](const std::string& id, const EpochMetrics& m) {
        out << epoch_line(id, m, cfg.train.epochs);
        out.flush();
    });
    const std::string dest = !out_override.empty() ? out_override
                             : cfg.output          ? cfg.output->string()
                                                   : std::string();
    if (dest.empty()) {
        out << sweep_csv(reports, cfg.checkpoints);
    } else {
        write_sweep_csv(reports, dest, cfg.checkpoints);
        out << "wrote " << dest << "\n";
    }
    int status = kOk;
    for (const auto& r : reports) {
        if (r.failed) {
            err << "error: run " << r.run_id << " failed: " << r.error << "\n";
            status = kRuntimeFailure;
        }
    }
    return status;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Activation-function benchmark: curves, invariant checks, training and sweeps"};
    app.require_subcommand(1);

    CurveArgs curve;
    auto* curve_cmd = app.add_subcommand("curve", "Write x,f,df samples of an activation as CSV");
    curve_cmd->add_option("--activation", curve.activation, "Activation")
        ->required()
        ->check(CLI::IsMember({"relu", "sigmoid", "swish", "aria1", "aria2", "aria"}));
    curve_cmd->add_option("--alpha", curve.alpha, "Exponent alpha (aria1, aria2)");
    curve_cmd->add_option("--beta", curve.beta, "Growth rate beta (sigmoid, swish, aria2)");
    curve_cmd->add_option("--richards", curve.richards, "Full parameters A,K,B,NU,Q,C (aria)");
    curve_cmd->add_option("--range", curve.range, "Sample interval MIN:MAX")->capture_default_str();
    curve_cmd->add_option("--steps", curve.steps, "Number of samples")->capture_default_str();
    curve_cmd->add_option("--out", curve.out, "Output CSV path (stdout if omitted)");

    CheckArgs check_args;
    auto* check_cmd = app.add_subcommand("check", "Run the invariant battery");
    check_cmd->add_option("--grid-density", check_args.grid_points, "Grid points on [-20, 20]")
        ->capture_default_str();
    check_cmd->add_option("--fuzz-samples", check_args.fuzz_samples, "Random stability probes")
        ->capture_default_str();
    check_cmd->add_option("--fuzz-seed", check_args.fuzz_seed, "Seed for stability probes")
        ->capture_default_str();
#ifdef ARIA_FAULT_INJECTION
    check_cmd->add_option("--inject-fault", check_args.inject_fault, "Corrupt a kernel (gradient)");
#endif

    std::string train_config;
    std::string train_out;
    auto* train_cmd = app.add_subcommand("train", "Train one model from a JSON config");
    train_cmd->add_option("config", train_config, "Run config (JSON)")->required();
    train_cmd->add_option("--out", train_out, "Report CSV path (overrides config)");

    std::string sweep_config;
    std::string sweep_out;
    std::size_t jobs = 1;
    auto* sweep_cmd = app.add_subcommand("sweep", "Train one model per grid point");
    sweep_cmd->add_option("config", sweep_config, "Sweep config (JSON)")->required();
    sweep_cmd->add_option("--jobs", jobs, "Parallel runs")->capture_default_str()->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--out", sweep_out, "Sweep CSV path (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (*curve_cmd) return run_curve(curve, out);
        if (*check_cmd) return run_check(check_args, out, err);
        if (*train_cmd) return run_train(train_config, train_out, out);
        if (*sweep_cmd) return run_sweep(sweep_config, jobs, sweep_out, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const InvalidParams& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeFailure;
    }
    return kUsage;
}

}  // namespace aria::cli
