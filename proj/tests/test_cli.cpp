#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aria/config.hpp"
#include "aria/errors.hpp"
#include "aria/sweep.hpp"
#include "cli.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

Outcome cli(std::vector<std::string> args) {
    args.insert(args.begin(), "aria-bench");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Outcome o;
    o.code = aria::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "aria-test-cli";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path write_json(const std::string& name, const json& j) {
    const fs::path p = temp_dir() / name;
    std::ofstream(p) << j.dump(2);
    return p;
}

std::size_t count_lines(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

json moons_run(std::size_t epochs = 3) {
    return {
        {"run_id", "moons"},
        {"model", {{"preset", "mlp"}, {"seed", 1}, {"input", 2}, {"hidden", {8}}, {"classes", 2},
                   {"activation", {{"kind", "aria2"}, {"alpha", 1.5}, {"beta", 1}}}}},
        {"train", {{"epochs", epochs}, {"batch_size", 8}, {"optimizer", {{"kind", "adam"}, {"lr", 0.01}}}}},
        {"dataset", {{"kind", "two_moons"}, {"train_size", 200}, {"test_size", 200}, {"noise", 0.1}, {"seed", 3}}},
    };
}

json moons_sweep() {
    json j = moons_run(2);
    j.erase("run_id");
    j["alphas"] = {1.25, 1.5};
    j["betas"] = {1};
    j["include_relu"] = true;
    return j;
}

// Runs a binary, capturing stdout and stderr to files.
Outcome spawn(const std::string& command) {
    const fs::path out = temp_dir() / "spawn.out";
    const fs::path err = temp_dir() / "spawn.err";
    const int status = std::system((command + " >" + out.string() + " 2>" + err.string()).c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.out = slurp(out);
    o.err = slurp(err);
    return o;
}

}  // namespace

TEST_CASE("curve writes the requested rows") {
    const fs::path out = temp_dir() / "relu.csv";
    const auto r = cli({"curve", "--activation", "relu", "--range", "-5:5", "--steps", "101", "--out", out.string()});
    CHECK(r.code == 0);
    const std::string csv = slurp(out);
    CHECK(count_lines(csv) == 102);
    CHECK(csv.rfind("x,f,df\n-5,0,0\n", 0) == 0);

    const auto to_stdout = cli({"curve", "--activation", "relu", "--steps", "3"});
    CHECK(to_stdout.code == 0);
    CHECK(to_stdout.out == "x,f,df\n-5,0,0\n0,0,0\n5,5,1\n");
}

TEST_CASE("curve aliases of the alpha = 1 member produce identical files") {
    const fs::path a = temp_dir() / "aria2.csv", s = temp_dir() / "swish.csv", one = temp_dir() / "aria1.csv";
    REQUIRE(cli({"curve", "--activation", "aria2", "--alpha", "1", "--beta", "1", "--range", "-8:8", "--steps", "801", "--out", a.string()}).code == 0);
    REQUIRE(cli({"curve", "--activation", "swish", "--beta", "1", "--range", "-8:8", "--steps", "801", "--out", s.string()}).code == 0);
    REQUIRE(cli({"curve", "--activation", "aria1", "--alpha", "1", "--range", "-8:8", "--steps", "801", "--out", one.string()}).code == 0);
    CHECK(slurp(a) == slurp(s));
    CHECK(slurp(a) == slurp(one));
    CHECK(slurp(a).size() > 10000);
}

TEST_CASE("curve validation and io errors") {
    const auto zero = cli({"curve", "--activation", "aria2", "--alpha", "0", "--out", "x.csv"});
    CHECK(zero.code == 2);
    CHECK(zero.err.find("alpha must be > 0") != std::string::npos);
    CHECK(cli({"curve", "--activation", "aria2", "--beta", "-1"}).code == 2);
    CHECK(cli({"curve", "--activation", "gelu"}).code == 2);
    CHECK(cli({"curve", "--activation", "relu", "--alpha", "2"}).code == 2);
    CHECK(cli({"curve", "--activation", "relu", "--range", "5:-5"}).code == 2);
    CHECK(cli({"curve", "--activation", "relu", "--range", "abc"}).code == 2);
    CHECK(cli({"curve", "--activation", "relu", "--steps", "1"}).code == 2);
    CHECK(cli({"curve", "--activation", "aria", "--richards", "0,1,1,0,1,1"}).code == 2);
    CHECK(cli({"curve", "--activation", "aria", "--richards", "0,1,1"}).code == 2);
    CHECK(cli({"curve", "--activation", "aria", "--richards", "0,1,2,0.5,1,1", "--steps", "5"}).code == 0);
    CHECK(cli({"curve"}).code == 2);
    CHECK(cli({}).code == 2);
    CHECK(cli({"bogus"}).code == 2);
    const auto io = cli({"curve", "--activation", "relu", "--out", "/nonexistent-dir/relu.csv"});
    CHECK(io.code == 1);
    CHECK_FALSE(io.err.empty());
}

TEST_CASE("check runs the battery") {
    const auto r = cli({"check", "--fuzz-samples", "50000"});
    CHECK(r.code == 0);
    CHECK(count_lines(r.out) == 9);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(r.out.find("PASS gradient-check") != std::string::npos);
    const auto dense = cli({"check", "--grid-density", "10001", "--fuzz-samples", "1000"});
    CHECK(dense.code == 0);
    CHECK(dense.out.find("x 10001 points") != std::string::npos);
    CHECK(cli({"check", "--grid-density", "1"}).code == 2);
    CHECK(cli({"check", "--inject-fault", "gradient"}).code == 2);  // only in the test build
}

TEST_CASE("injected wrong derivative fails the gradient check") {
    const auto r = spawn(std::string(ARIA_BENCH_FAULTABLE_PATH) + " check --inject-fault gradient --fuzz-samples 1000");
    CHECK(r.code == 1);
    CHECK(r.out.find("FAIL gradient-check") != std::string::npos);
    CHECK(r.err.find("gradient-check") != std::string::npos);
    CHECK(r.err.find("(alpha=") != std::string::npos);
    CHECK(r.err.find("x=") != std::string::npos);

    const auto clean = spawn(std::string(ARIA_BENCH_PATH) + " check --fuzz-samples 1000");
    CHECK(clean.code == 0);
}

TEST_CASE("train prints epochs and writes identical reports") {
    const fs::path cfg = write_json("moons.json", moons_run());
    const fs::path a = temp_dir() / "a.csv", b = temp_dir() / "b.csv";
    const auto r1 = cli({"train", cfg.string(), "--out", a.string()});
    CHECK(r1.code == 0);
    CHECK(r1.out.find("moons epoch 3/3 train_loss=") != std::string::npos);
    CHECK(cli({"train", cfg.string(), "--out", b.string()}).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(count_lines(slurp(a)) == 4);

    json with_output = moons_run();
    with_output["output"] = (temp_dir() / "c.csv").string();
    CHECK(cli({"train", write_json("out.json", with_output).string()}).code == 0);
    CHECK(slurp(temp_dir() / "c.csv") == slurp(a));
}

TEST_CASE("config errors name their json path") {
    const auto expect = [](json j, const std::string& path) {
        const auto r = cli({"train", write_json("bad.json", j).string()});
        CHECK(r.code == 2);
        INFO(r.err);
        CHECK(r.err.find("error: " + path + ":") != std::string::npos);
    };
    json j = moons_run();
    j["train"]["optimizer"]["lr"] = -0.1;
    expect(j, "train.optimizer.lr");
    j = moons_run();
    j["train"]["optimizer"]["lr"] = 0;
    expect(j, "train.optimizer.lr");
    j = moons_run();
    j["train"]["epochs"] = 0;
    expect(j, "train.epochs");
    j = moons_run();
    j["train"]["optimizer"]["kind"] = "rmsprop";
    expect(j, "train.optimizer.kind");
    j = moons_run();
    j["model"]["activation"]["alpha"] = 0;
    expect(j, "model.activation.alpha");
    j = moons_run();
    j["model"]["activation"]["beta"] = -2;
    expect(j, "model.activation.beta");
    j = moons_run();
    j["dataset"]["kind"] = "cifar";
    expect(j, "dataset.kind");
    j = moons_run();
    j["dataset"]["train_size"] = 201;
    expect(j, "dataset.train_size");
    j = moons_run();
    j["run_id"] = "a,b";
    expect(j, "run_id");
    j = moons_run();
    j["unexpected"] = 1;
    expect(j, "unexpected");
    j = moons_run();
    j.erase("model");
    expect(j, "model");

    j = moons_run();
    j["model"] = {{"seed", 0},
                  {"input_shape", {2}},
                  {"layers", {{{"type", "dense"}, {"in", 2}, {"out", 4}, {"activation", "relu"}},
                              {{"type", "dense"}, {"in", 5}, {"out", 2}},
                              {{"type", "softmax"}, {"classes", 2}}}}};
    expect(j, "model.layers");
    j["model"]["layers"][1]["in"] = 4;
    CHECK(cli({"train", write_json("layers.json", j).string()}).code == 0);
    j["model"]["layers"][1]["type"] = "dense3d";
    expect(j, "model.layers[1].type");
    j["model"]["layers"][1] = {{"type", "dropout"}, {"rate", 1.0}};
    expect(j, "model.layers[1].rate");

    std::ofstream(temp_dir() / "syntax.json") << "{ \"model\": ";
    const auto syntax = cli({"train", (temp_dir() / "syntax.json").string()});
    CHECK(syntax.code == 2);
    CHECK(cli({"train", (temp_dir() / "does-not-exist.json").string()}).code == 2);
}

TEST_CASE("sgd default schedule scales with epochs") {
    json j = moons_run(10);
    j["train"]["optimizer"] = {{"kind", "sgd"}, {"lr", 0.125}, {"decay_factor", 0.2}};
    const auto cfg = aria::config::parse_run_config(j);
    const auto& sgd = std::get<aria::nn::SgdSpec>(cfg.train.optimizer);
    CHECK(sgd.decay_epochs == std::vector<std::size_t>{3, 6, 8});
    CHECK(cfg.train.shuffle_seed == 2);
    CHECK(cli({"train", write_json("sgd.json", j).string()}).code == 0);
}

TEST_CASE("missing dataset files are a runtime failure") {
    json j = moons_run();
    j["dataset"] = {{"kind", "mnist"}, {"dir", "/nonexistent-mnist"}};
    const auto r = cli({"train", write_json("mnist.json", j).string()});
    CHECK(r.code == 1);
}

TEST_CASE("sweep grid arithmetic") {
    const fs::path out = temp_dir() / "sweep3.csv";
    const auto r = cli({"sweep", write_json("sweep3.json", moons_sweep()).string(), "--out", out.string()});
    CHECK(r.code == 0);
    const std::string csv = slurp(out);
    CHECK(count_lines(csv) == 4);
    CHECK(csv.find("\nrelu,relu,,,ok,2,") != std::string::npos);
    CHECK(csv.find("\naria2_a1.25_b1,aria2,1.25,1,ok,2,") != std::string::npos);

    json table = moons_sweep();
    table["alphas"] = {0.5, 0.75, 1, 1.25, 1.5, 1.75, 2};
    table["extra_points"] = {{1.5, 2}};
    table["train"]["epochs"] = 1;
    const fs::path table_out = temp_dir() / "table.csv";
    CHECK(cli({"sweep", write_json("table.json", table).string(), "--out", table_out.string()}).code == 0);
    const std::string t = slurp(table_out);
    CHECK(count_lines(t) == 10);
    CHECK(t.find("\naria2_a1.5_b2,aria2,1.5,2,ok") != std::string::npos);
}

TEST_CASE("sweep results do not depend on parallelism and match single runs") {
    json j = moons_sweep();
    j["alphas"] = {1, 1.5};
    j["include_swish_beta1"] = true;
    const fs::path cfg = write_json("par.json", j);
    const fs::path seq = temp_dir() / "seq.csv", par = temp_dir() / "par.csv";
    CHECK(cli({"sweep", cfg.string(), "--out", seq.string()}).code == 0);
    CHECK(cli({"sweep", cfg.string(), "--jobs", "3", "--out", par.string()}).code == 0);
    CHECK(slurp(seq) == slurp(par));

    const auto parsed = aria::config::parse_sweep_config(j);
    const auto data = aria::config::load_dataset(parsed.dataset);
    const auto reports = aria::sweep::run(parsed, data, 2);
    REQUIRE(reports.size() == 4);
    CHECK(reports[0].run_id == "relu");
    CHECK(reports[1].run_id == "swish_b1");
    CHECK(reports[2].run_id == "aria2_a1_b1");
    // The alpha = 1 grid point reproduces Swish(1) end to end.
    CHECK(reports[1].per_epoch == reports[2].per_epoch);

    // Same as a standalone run of the template with that activation.
    const auto spec = aria::nn::with_activation(parsed.model, aria::Activation::aria2(1.5, 1.0));
    const auto single = aria::sweep::run_point(spec, parsed.train, data, "aria2_a1.5_b1");
    CHECK(aria::same_results(single, reports[3]));
}

TEST_CASE("failed sweep runs become failed rows") {
    json j = moons_sweep();
    j["train"]["optimizer"] = {{"kind", "sgd"}, {"lr", 1e300}};
    const fs::path out = temp_dir() / "failed.csv";
    const auto r = cli({"sweep", write_json("failed.json", j).string(), "--out", out.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("failed") != std::string::npos);
    const std::string csv = slurp(out);
    CHECK(count_lines(csv) == 4);
    CHECK(csv.find(",failed,,,") != std::string::npos);

    // Library level: any exception inside a run is captured.
    const auto parsed = aria::config::parse_sweep_config(moons_sweep());
    const auto data = aria::config::load_dataset(parsed.dataset);
    aria::nn::ModelSpec wrong = parsed.model;
    wrong.input_shape = {3};
    std::get<aria::nn::DenseSpec>(wrong.layers[0]).in = 3;
    const auto failed = aria::sweep::run_point(wrong, parsed.train, data, "wrong");
    CHECK(failed.failed);
    CHECK_FALSE(failed.error.empty());
}

TEST_CASE("sweep config validation") {
    const auto expect = [](json j, const std::string& path) {
        const auto r = cli({"sweep", write_json("badsweep.json", j).string()});
        CHECK(r.code == 2);
        INFO(r.err);
        CHECK(r.err.find("error: " + path + ":") != std::string::npos);
    };
    json j = moons_sweep();
    j["alphas"] = {1, 0};
    expect(j, "alphas[1]");
    j = moons_sweep();
    j["betas"] = {-1};
    expect(j, "betas[0]");
    j = moons_sweep();
    j["alphas"] = json::array();
    j["betas"] = json::array();
    expect(j, "alphas");
    j = moons_sweep();
    j["extra_points"] = {{1.5}};
    expect(j, "extra_points[0]");
    CHECK(cli({"sweep", write_json("jobs.json", moons_sweep()).string(), "--jobs", "0"}).code == 2);
}

TEST_CASE("shipped configs parse") {
    for (const auto& entry : fs::directory_iterator(ARIA_CONFIG_DIR)) {
        if (entry.path().extension() != ".json") continue;
        INFO(entry.path().string());
        const auto j = aria::config::read_json_file(entry.path());
        if (j.contains("alphas")) {
            CHECK_NOTHROW(aria::config::parse_sweep_config(j, entry.path().parent_path()));
        } else {
            CHECK_NOTHROW(aria::config::parse_run_config(j, entry.path().parent_path()));
        }
    }
}
