#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include "aria/data.hpp"
#include "aria/errors.hpp"
#include "aria/format.hpp"

namespace aria {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string optional_number(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

// (group, alpha, beta): ReLU first, Sigmoid next, Richard's-curve family by (alpha, beta).
std::tuple<int, double, double> sort_key(const std::optional<Activation>& act) {
    if (!act) return {-1, 0.0, 0.0};
    const Activation& a = *act;
    return std::visit(Overloaded{
                          [](const Relu&) { return std::tuple{0, 0.0, 0.0}; },
                          [](const Sigmoid& s) { return std::tuple{1, 0.0, s.beta}; },
                          [](const Swish& s) { return std::tuple{2, 1.0, s.beta}; },
                          [](const Aria1& p) { return std::tuple{2, p.alpha, 1.0}; },
                          [](const Aria2& p) {
                              return std::tuple{2, p.params.alpha, p.params.beta};
                          },
                          [](const AriaFull& p) {
                              return std::tuple{2, 1.0 / p.params.nu, p.params.B};
                          },
                      },
                      a.kind());
}

HyperParameters optional_hyper_parameters(const std::optional<Activation>& a) {
    return a ? hyper_parameters(*a) : HyperParameters{};
}

}  // namespace

std::string activation_name(const std::optional<Activation>& a) {
    return a ? a->name() : std::string("linear");
}

bool same_results(const RunReport& a, const RunReport& b) {
    return a.run_id == b.run_id && a.activation == b.activation && a.per_epoch == b.per_epoch &&
           a.failed == b.failed && a.error == b.error;
}

HyperParameters hyper_parameters(const Activation& a) {
    return std::visit(Overloaded{
                          [](const Relu&) { return HyperParameters{}; },
                          [](const Sigmoid& s) { return HyperParameters{std::nullopt, s.beta}; },
                          [](const Swish& s) { return HyperParameters{std::nullopt, s.beta}; },
                          [](const Aria1& p) { return HyperParameters{p.alpha, 1.0}; },
                          [](const Aria2& p) {
                              return HyperParameters{p.params.alpha, p.params.beta};
                          },
                          [](const AriaFull&) { return HyperParameters{}; },
                      },
                      a.kind());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

std::string curve_csv(const Activation& a, double x_min, double x_max, std::size_t steps) {
    if (steps < 2) throw InvalidParams("steps must be >= 2");
    if (!(x_min < x_max)) throw InvalidParams("range must satisfy min < max");
    std::string out = "x,f,df\n";
    const double last = static_cast<double>(steps - 1);
    for (std::size_t i = 0; i < steps; ++i) {
        // Weighted form keeps decimal grid points such as 0.1 exact where possible.
        const double t = static_cast<double>(i);
        const double x = i + 1 == steps ? x_max : (x_min * (last - t) + x_max * t) / last;
        out += format_double(x);
        out += ',';
        out += format_double(a.value(x));
        out += ',';
        out += format_double(a.derivative(x));
        out += '\n';
    }
    return out;
}

void write_curve_csv(const Activation& a, double x_min, double x_max, std::size_t steps,
                     const std::filesystem::path& path) {
    write_text_file(path, curve_csv(a, x_min, x_max, steps));
}

std::string report_csv(const RunReport& report) {
    const auto hp = optional_hyper_parameters(report.activation);
    std::string prefix = report.run_id + "," + activation_name(report.activation) + "," +
                         optional_number(hp.alpha) + "," + optional_number(hp.beta) + ",";
    std::string out = "run_id,activation,alpha,beta,epoch,train_loss,test_accuracy\n";
    for (const EpochMetrics& m : report.per_epoch) {
        out += prefix + std::to_string(m.epoch) + "," + format_double(m.train_loss) + "," +
               format_double(m.test_accuracy) + "\n";
    }
    return out;
}

void write_report_csv(const RunReport& report, const std::filesystem::path& path) {
    write_text_file(path, report_csv(report));
}

std::string sweep_csv(std::vector<RunReport> reports, const std::vector<std::size_t>& checkpoints) {
    if (reports.empty()) throw InvalidParams("sweep needs at least one report");
    std::stable_sort(reports.begin(), reports.end(), [](const RunReport& a, const RunReport& b) {
        return sort_key(a.activation) < sort_key(b.activation);
    });

    std::size_t max_epoch = 0;
    for (const RunReport& r : reports) {
        if (!r.per_epoch.empty()) max_epoch = std::max(max_epoch, r.per_epoch.back().epoch);
    }
    std::vector<std::size_t> columns;
    for (std::size_t c : checkpoints) {
        if (c >= 1 && c <= max_epoch) columns.push_back(c);
    }

    std::string out = "run_id,activation,alpha,beta,status,epochs,final_train_loss,final_test_accuracy";
    for (std::size_t c : columns) out += ",acc_epoch_" + std::to_string(c);
    out += '\n';

    for (const RunReport& r : reports) {
        const auto hp = optional_hyper_parameters(r.activation);
        out += r.run_id + "," + activation_name(r.activation) + "," + optional_number(hp.alpha) + "," +
               optional_number(hp.beta) + ",";
        if (r.failed || r.per_epoch.empty()) {
            out += "failed,,,";
            for (std::size_t i = 0; i < columns.size(); ++i) out += ',';
            out += '\n';
            continue;
        }
        const EpochMetrics& last = r.per_epoch.back();
        out += "ok," + std::to_string(last.epoch) + "," + format_double(last.train_loss) + "," +
               format_double(last.test_accuracy);
        for (std::size_t c : columns) {
            out += ',';
            auto it = std::find_if(r.per_epoch.begin(), r.per_epoch.end(),
                                   [c](const EpochMetrics& m) { return m.epoch == c; });
            if (it != r.per_epoch.end()) out += format_double(it->test_accuracy);
        }
        out += '\n';
    }
    return out;
}

void write_sweep_csv(const std::vector<RunReport>& reports, const std::filesystem::path& path,
                     const std::vector<std::size_t>& checkpoints) {
    write_text_file(path, sweep_csv(reports, checkpoints));
}

}  // namespace aria
