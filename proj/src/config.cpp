#include "aria/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "aria/errors.hpp"

namespace aria::config {

namespace {

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

// Rejects unknown members so that typos surface as errors with a path.
void allow_only(const Json& j, const std::string& path, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "must be an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw ConfigError(join(path, key), "unknown field");
    }
}

const Json& required(const Json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) throw ConfigError(join(path, key), "is required");
    return j.at(key);
}

double number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
    return v;
}

double number_or(const Json& j, const std::string& path, const char* key, double fallback) {
    return j.contains(key) ? number(j.at(key), join(path, key)) : fallback;
}

std::uint64_t unsigned_integer(const Json& j, const std::string& path) {
    if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
        throw ConfigError(path, "must be a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

std::size_t positive_integer(const Json& j, const std::string& path) {
    const auto v = unsigned_integer(j, path);
    if (v == 0) throw ConfigError(path, "must be >= 1");
    return static_cast<std::size_t>(v);
}

std::size_t positive_or(const Json& j, const std::string& path, const char* key, std::size_t fallback) {
    return j.contains(key) ? positive_integer(j.at(key), join(path, key)) : fallback;
}

std::uint64_t seed_or(const Json& j, const std::string& path, const char* key, std::uint64_t fallback) {
    return j.contains(key) ? unsigned_integer(j.at(key), join(path, key)) : fallback;
}

std::string string_of(const Json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "must be a string");
    return j.get<std::string>();
}

bool bool_or(const Json& j, const std::string& path, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) throw ConfigError(join(path, key), "must be true or false");
    return j.at(key).get<bool>();
}

const Json& array_of(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path, "must be an array");
    return j;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) return base / path;
    return path;
}

// Wraps library validation so its message gains the JSON path.
template <class F>
auto with_path(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
}

std::optional<Activation> optional_activation(const Json& j, const std::string& path,
                                              const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return parse_activation(j.at(key), join(path, key));
}

std::string checked_run_id(const Json& j, const std::string& path) {
    std::string id = string_of(j, path);
    if (id.empty() || id.find_first_of(",\n\r\"") != std::string::npos) {
        throw ConfigError(path, "must be non-empty without commas, quotes or newlines");
    }
    return id;
}

}  // namespace

// ---------------------------------------------------------------------------

nn::ModelSpec desk_cnn(const Activation& a, std::uint64_t seed, std::size_t dense_units,
                       double dropout, std::size_t conv1, std::size_t conv2) {
    nn::ModelSpec spec;
    spec.input_shape = {1, 28, 28};
    spec.seed = seed;
    spec.layers = {
        nn::Conv2DSpec{1, conv1, 3, 3, 1, 1, a},
        nn::MaxPool2DSpec{2, 2},
        nn::Conv2DSpec{conv1, conv2, 3, 3, 1, 1, a},
        nn::MaxPool2DSpec{2, 2},
        nn::FlattenSpec{},
        nn::DenseSpec{conv2 * 7 * 7, dense_units, a},
        nn::DropoutSpec{dropout},
        nn::DenseSpec{dense_units, 10, std::nullopt},
        nn::SoftmaxOutputSpec{10},
    };
    return spec;
}

nn::ModelSpec mlp(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t classes,
                  const Activation& a, std::uint64_t seed) {
    nn::ModelSpec spec;
    spec.input_shape = {input};
    spec.seed = seed;
    std::size_t width = input;
    for (std::size_t h : hidden) {
        spec.layers.push_back(nn::DenseSpec{width, h, a});
        width = h;
    }
    spec.layers.push_back(nn::DenseSpec{width, classes, std::nullopt});
    spec.layers.push_back(nn::SoftmaxOutputSpec{classes});
    return spec;
}

std::vector<std::size_t> default_decay_epochs(std::size_t epochs) {
    std::vector<std::size_t> out;
    for (std::size_t d : {30, 60, 80}) {
        const auto scaled = static_cast<std::size_t>(
            std::llround(static_cast<double>(d) * static_cast<double>(epochs) / 100.0));
        if (out.empty() || out.back() != scaled) out.push_back(scaled);
    }
    return out;
}

Activation parse_activation(const Json& j, const std::string& path) {
    if (j.is_string()) {
        const std::string kind = j.get<std::string>();
        if (kind == "relu") return Activation::relu();
        if (kind == "sigmoid") return Activation::sigmoid();
        if (kind == "swish") return Activation::swish(1.0);
        throw ConfigError(path, "unknown activation \"" + kind + "\"");
    }
    if (!j.is_object()) throw ConfigError(path, "must be an activation object or name");
    const std::string kind = string_of(required(j, path, "kind"), join(path, "kind"));
    // Records the first bad parameter with its own path.
    const auto checked = [&](const char* key, double v, bool ok, const char* msg) {
        if (!ok) throw ConfigError(join(path, key), msg);
        return v;
    };
    if (kind == "relu") {
        allow_only(j, path, {"kind"});
        return Activation::relu();
    }
    if (kind == "sigmoid" || kind == "swish") {
        allow_only(j, path, {"kind", "beta"});
        const double beta = number_or(j, path, "beta", 1.0);
        return kind == "sigmoid" ? Activation::sigmoid(beta) : Activation::swish(beta);
    }
    if (kind == "aria1") {
        allow_only(j, path, {"kind", "alpha"});
        const double alpha = number(required(j, path, "alpha"), join(path, "alpha"));
        checked("alpha", alpha, alpha > 0.0, "alpha must be > 0");
        return Activation::aria1(alpha);
    }
    if (kind == "aria2") {
        allow_only(j, path, {"kind", "alpha", "beta"});
        const double alpha = number(required(j, path, "alpha"), join(path, "alpha"));
        const double beta = number(required(j, path, "beta"), join(path, "beta"));
        checked("alpha", alpha, alpha > 0.0, "alpha must be > 0");
        checked("beta", beta, beta >= 0.0, "beta must be >= 0");
        return Activation::aria2(alpha, beta);
    }
    if (kind == "aria") {
        allow_only(j, path, {"kind", "A", "K", "B", "nu", "Q", "C"});
        RichardsParams p;
        p.A = number_or(j, path, "A", p.A);
        p.K = number_or(j, path, "K", p.K);
        p.B = number_or(j, path, "B", p.B);
        p.nu = checked("nu", number_or(j, path, "nu", p.nu), number_or(j, path, "nu", p.nu) > 0.0,
                       "nu must be > 0");
        p.Q = checked("Q", number_or(j, path, "Q", p.Q), number_or(j, path, "Q", p.Q) >= 0.0,
                      "Q must be >= 0");
        p.C = checked("C", number_or(j, path, "C", p.C), number_or(j, path, "C", p.C) > 0.0,
                      "C must be > 0");
        return Activation::aria_full(p);
    }
    throw ConfigError(join(path, "kind"), "unknown activation \"" + kind + "\"");
}

nn::ModelSpec parse_model(const Json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "must be an object");
    const std::uint64_t seed = seed_or(j, path, "seed", 0);

    if (j.contains("preset")) {
        const std::string preset = string_of(j.at("preset"), join(path, "preset"));
        if (preset == "desk_cnn") {
            allow_only(j, path, {"preset", "seed", "activation", "dense_units", "dropout", "conv_channels"});
            const Activation a = parse_activation(required(j, path, "activation"), join(path, "activation"));
            const std::size_t dense = positive_or(j, path, "dense_units", 128);
            const double dropout = number_or(j, path, "dropout", 0.4);
            if (!(dropout >= 0.0 && dropout < 1.0)) {
                throw ConfigError(join(path, "dropout"), "must be in [0, 1)");
            }
            std::size_t c1 = 8, c2 = 16;
            if (j.contains("conv_channels")) {
                const std::string p = join(path, "conv_channels");
                const Json& arr = array_of(j.at("conv_channels"), p);
                if (arr.size() != 2) throw ConfigError(p, "must list exactly two channel counts");
                c1 = positive_integer(arr[0], index(p, 0));
                c2 = positive_integer(arr[1], index(p, 1));
            }
            return desk_cnn(a, seed, dense, dropout, c1, c2);
        }
        if (preset == "mlp") {
            allow_only(j, path, {"preset", "seed", "activation", "input", "hidden", "classes"});
            const Activation a = parse_activation(required(j, path, "activation"), join(path, "activation"));
            const std::size_t input = positive_integer(required(j, path, "input"), join(path, "input"));
            const std::size_t classes = positive_integer(required(j, path, "classes"), join(path, "classes"));
            std::vector<std::size_t> hidden;
            if (j.contains("hidden")) {
                const std::string p = join(path, "hidden");
                const Json& arr = array_of(j.at("hidden"), p);
                for (std::size_t i = 0; i < arr.size(); ++i) hidden.push_back(positive_integer(arr[i], index(p, i)));
            }
            return mlp(input, hidden, classes, a, seed);
        }
        throw ConfigError(join(path, "preset"), "unknown preset \"" + preset + "\"");
    }

    allow_only(j, path, {"seed", "input_shape", "layers"});
    nn::ModelSpec spec;
    spec.seed = seed;
    {
        const std::string p = join(path, "input_shape");
        const Json& arr = array_of(required(j, path, "input_shape"), p);
        if (arr.empty()) throw ConfigError(p, "must not be empty");
        for (std::size_t i = 0; i < arr.size(); ++i) spec.input_shape.push_back(positive_integer(arr[i], index(p, i)));
    }
    const std::string lp = join(path, "layers");
    const Json& layers = array_of(required(j, path, "layers"), lp);
    if (layers.empty()) throw ConfigError(lp, "must not be empty");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const Json& l = layers[i];
        const std::string p = index(lp, i);
        if (!l.is_object()) throw ConfigError(p, "must be an object");
        const std::string type = string_of(required(l, p, "type"), join(p, "type"));
        if (type == "dense") {
            allow_only(l, p, {"type", "in", "out", "activation"});
            spec.layers.push_back(nn::DenseSpec{positive_integer(required(l, p, "in"), join(p, "in")),
                                                positive_integer(required(l, p, "out"), join(p, "out")),
                                                optional_activation(l, p, "activation")});
        } else if (type == "conv2d") {
            allow_only(l, p, {"type", "in_channels", "out_channels", "kernel", "stride", "padding", "activation"});
            nn::Conv2DSpec c;
            c.in_channels = positive_integer(required(l, p, "in_channels"), join(p, "in_channels"));
            c.out_channels = positive_integer(required(l, p, "out_channels"), join(p, "out_channels"));
            const std::string kp = join(p, "kernel");
            const Json& k = required(l, p, "kernel");
            if (k.is_array()) {
                if (k.size() != 2) throw ConfigError(kp, "must be [h, w] or a single integer");
                c.kernel_h = positive_integer(k[0], index(kp, 0));
                c.kernel_w = positive_integer(k[1], index(kp, 1));
            } else {
                c.kernel_h = c.kernel_w = positive_integer(k, kp);
            }
            c.stride = positive_or(l, p, "stride", 1);
            c.padding = l.contains("padding") ? static_cast<std::size_t>(unsigned_integer(l.at("padding"), join(p, "padding"))) : 0;
            c.activation = optional_activation(l, p, "activation");
            spec.layers.push_back(c);
        } else if (type == "maxpool2d") {
            allow_only(l, p, {"type", "window", "stride"});
            const std::size_t window = positive_or(l, p, "window", 2);
            spec.layers.push_back(nn::MaxPool2DSpec{window, positive_or(l, p, "stride", window)});
        } else if (type == "dropout") {
            allow_only(l, p, {"type", "rate"});
            const double rate = number(required(l, p, "rate"), join(p, "rate"));
            if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError(join(p, "rate"), "must be in [0, 1)");
            spec.layers.push_back(nn::DropoutSpec{rate});
        } else if (type == "flatten") {
            allow_only(l, p, {"type"});
            spec.layers.push_back(nn::FlattenSpec{});
        } else if (type == "softmax") {
            allow_only(l, p, {"type", "classes"});
            spec.layers.push_back(nn::SoftmaxOutputSpec{positive_integer(required(l, p, "classes"), join(p, "classes"))});
        } else {
            throw ConfigError(join(p, "type"), "unknown layer type \"" + type + "\"");
        }
    }
    with_path(lp, [&] { return nn::infer_shapes(spec); });
    return spec;
}

nn::TrainConfig parse_train(const Json& j, const std::string& path, std::uint64_t model_seed) {
    allow_only(j, path, {"epochs", "batch_size", "shuffle_seed", "optimizer"});
    nn::TrainConfig cfg;
    cfg.epochs = positive_integer(required(j, path, "epochs"), join(path, "epochs"));
    cfg.batch_size = positive_or(j, path, "batch_size", 64);
    cfg.shuffle_seed = seed_or(j, path, "shuffle_seed", model_seed + kShuffleStream);

    const std::string op = join(path, "optimizer");
    const Json& o = required(j, path, "optimizer");
    if (!o.is_object()) throw ConfigError(op, "must be an object");
    const std::string kind = string_of(required(o, op, "kind"), join(op, "kind"));
    const auto positive = [&](const char* key, double fallback) {
        const double v = number_or(o, op, key, fallback);
        if (!(v > 0.0)) throw ConfigError(join(op, key), "must be > 0");
        return v;
    };
    const auto unit_interval = [&](const char* key, double fallback) {
        const double v = number_or(o, op, key, fallback);
        if (!(v >= 0.0 && v < 1.0)) throw ConfigError(join(op, key), "must be in [0, 1)");
        return v;
    };
    if (kind == "adam") {
        allow_only(o, op, {"kind", "lr", "beta1", "beta2", "eps"});
        nn::AdamSpec a;
        a.lr = positive("lr", a.lr);
        a.beta1 = unit_interval("beta1", a.beta1);
        a.beta2 = unit_interval("beta2", a.beta2);
        a.eps = positive("eps", a.eps);
        cfg.optimizer = a;
    } else if (kind == "sgd") {
        allow_only(o, op, {"kind", "lr", "decay_factor", "decay_epochs"});
        nn::SgdSpec s;
        if (!o.contains("lr")) throw ConfigError(join(op, "lr"), "is required");
        s.lr = positive("lr", s.lr);
        s.decay_factor = number_or(o, op, "decay_factor", 1.0);
        if (!(s.decay_factor > 0.0 && s.decay_factor <= 1.0)) {
            throw ConfigError(join(op, "decay_factor"), "must be in (0, 1]");
        }
        if (o.contains("decay_epochs")) {
            const std::string dp = join(op, "decay_epochs");
            const Json& arr = array_of(o.at("decay_epochs"), dp);
            for (std::size_t i = 0; i < arr.size(); ++i) {
                s.decay_epochs.push_back(static_cast<std::size_t>(unsigned_integer(arr[i], index(dp, i))));
            }
        } else {
            s.decay_epochs = default_decay_epochs(cfg.epochs);
        }
        cfg.optimizer = s;
    } else {
        throw ConfigError(join(op, "kind"), "unknown optimizer \"" + kind + "\"");
    }
    return cfg;
}

DatasetSource parse_dataset(const Json& j, const std::string& path,
                            const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError(path, "must be an object");
    const std::string kind = string_of(required(j, path, "kind"), join(path, "kind"));
    if (kind == "two_moons") {
        allow_only(j, path, {"kind", "train_size", "test_size", "noise", "seed", "test_seed"});
        TwoMoonsSource s;
        s.train_size = positive_or(j, path, "train_size", s.train_size);
        s.test_size = positive_or(j, path, "test_size", s.test_size);
        if (s.train_size % 2) throw ConfigError(join(path, "train_size"), "must be even");
        if (s.test_size % 2) throw ConfigError(join(path, "test_size"), "must be even");
        s.noise = number_or(j, path, "noise", s.noise);
        if (!(s.noise >= 0.0)) throw ConfigError(join(path, "noise"), "must be >= 0");
        s.seed = seed_or(j, path, "seed", s.seed);
        s.test_seed = seed_or(j, path, "test_seed", s.seed + 1);
        return s;
    }
    if (kind == "mnist") {
        allow_only(j, path, {"kind", "dir", "train_images", "train_labels", "test_images",
                             "test_labels", "train_subset", "test_subset", "subset_seed"});
        std::filesystem::path dir = base_dir;
        if (j.contains("dir")) dir = resolve(base_dir, string_of(j.at("dir"), join(path, "dir")));
        // Default names are the official ones, gzipped or not.
        const auto file = [&](const char* key, const char* default_name) {
            if (j.contains(key)) return resolve(dir, string_of(j.at(key), join(path, key)));
            const auto plain = dir / default_name;
            const auto gz = dir / (std::string(default_name) + ".gz");
            return std::filesystem::exists(plain) || !std::filesystem::exists(gz) ? plain : gz;
        };
        MnistSource s;
        s.train_images = file("train_images", "train-images-idx3-ubyte");
        s.train_labels = file("train_labels", "train-labels-idx1-ubyte");
        s.test_images = file("test_images", "t10k-images-idx3-ubyte");
        s.test_labels = file("test_labels", "t10k-labels-idx1-ubyte");
        if (j.contains("train_subset")) s.train_subset = positive_integer(j.at("train_subset"), join(path, "train_subset"));
        if (j.contains("test_subset")) s.test_subset = positive_integer(j.at("test_subset"), join(path, "test_subset"));
        s.subset_seed = seed_or(j, path, "subset_seed", 0);
        return s;
    }
    throw ConfigError(join(path, "kind"), "unknown dataset kind \"" + kind + "\"");
}

LoadedData load_dataset(const DatasetSource& source) {
    if (const auto* moons = std::get_if<TwoMoonsSource>(&source)) {
        LoadedData d{make_two_moons(moons->train_size, moons->noise, moons->seed),
                     make_two_moons(moons->test_size, moons->noise, moons->test_seed)};
        d.train.split_name = "two_moons_train";
        d.test.split_name = "two_moons_test";
        return d;
    }
    const auto& m = std::get<MnistSource>(source);
    LoadedData d{load_mnist_idx(m.train_images, m.train_labels),
                 load_mnist_idx(m.test_images, m.test_labels)};
    if (m.train_subset) d.train = subset(d.train, *m.train_subset, m.subset_seed);
    if (m.test_subset) d.test = subset(d.test, *m.test_subset, m.subset_seed + 1);
    return d;
}

RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir) {
    allow_only(j, "", {"run_id", "model", "train", "dataset", "output"});
    RunConfig cfg;
    if (j.contains("run_id")) cfg.run_id = checked_run_id(j.at("run_id"), "run_id");
    cfg.model = parse_model(required(j, "", "model"), "model");
    cfg.train = parse_train(required(j, "", "train"), "train", cfg.model.seed);
    cfg.dataset = parse_dataset(required(j, "", "dataset"), "dataset", base_dir);
    if (j.contains("output")) cfg.output = string_of(j.at("output"), "output");
    return cfg;
}

SweepConfig parse_sweep_config(const Json& j, const std::filesystem::path& base_dir) {
    allow_only(j, "", {"alphas", "betas", "extra_points", "include_relu", "include_swish_beta1",
                       "model", "train", "dataset", "output", "checkpoints"});
    SweepConfig cfg;
    const auto reals = [&](const char* key, std::vector<double>& out, bool strictly_positive) {
        if (!j.contains(key)) return;
        const Json& arr = array_of(j.at(key), key);
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const double v = number(arr[i], index(key, i));
            if (strictly_positive && !(v > 0.0)) throw ConfigError(index(key, i), "alpha must be > 0");
            if (!strictly_positive && !(v >= 0.0)) throw ConfigError(index(key, i), "beta must be >= 0");
            out.push_back(v);
        }
    };
    reals("alphas", cfg.alphas, true);
    reals("betas", cfg.betas, false);
    if (j.contains("extra_points")) {
        const Json& arr = array_of(j.at("extra_points"), "extra_points");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string p = index("extra_points", i);
            if (!arr[i].is_array() || arr[i].size() != 2) throw ConfigError(p, "must be [alpha, beta]");
            const double alpha = number(arr[i][0], index(p, 0));
            const double beta = number(arr[i][1], index(p, 1));
            if (!(alpha > 0.0)) throw ConfigError(index(p, 0), "alpha must be > 0");
            if (!(beta >= 0.0)) throw ConfigError(index(p, 1), "beta must be >= 0");
            cfg.extra_points.emplace_back(alpha, beta);
        }
    }
    if (cfg.alphas.empty() != cfg.betas.empty()) {
        throw ConfigError(cfg.alphas.empty() ? "alphas" : "betas", "alphas and betas must both be given");
    }
    if (cfg.alphas.empty() && cfg.extra_points.empty()) {
        throw ConfigError("alphas", "grid is empty");
    }
    cfg.include_relu = bool_or(j, "", "include_relu", true);
    cfg.include_swish_beta1 = bool_or(j, "", "include_swish_beta1", false);
    cfg.model = parse_model(required(j, "", "model"), "model");
    cfg.train = parse_train(required(j, "", "train"), "train", cfg.model.seed);
    cfg.dataset = parse_dataset(required(j, "", "dataset"), "dataset", base_dir);
    if (j.contains("output")) cfg.output = string_of(j.at("output"), "output");
    if (j.contains("checkpoints")) {
        cfg.checkpoints.clear();
        const Json& arr = array_of(j.at("checkpoints"), "checkpoints");
        for (std::size_t i = 0; i < arr.size(); ++i) cfg.checkpoints.push_back(positive_integer(arr[i], index("checkpoints", i)));
    }
    return cfg;
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
}

}  // namespace aria::config
