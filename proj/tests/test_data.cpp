#include <doctest.h>

#include <zlib.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "aria/data.hpp"
#include "aria/errors.hpp"
#include "aria/rng.hpp"

using namespace aria;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "aria-test-data";
    fs::create_directories(dir);
    return dir;
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::uint8_t> gzip(const std::vector<std::uint8_t>& raw) {
    z_stream zs{};
    REQUIRE(deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, 16 + MAX_WBITS, 8, Z_DEFAULT_STRATEGY) == Z_OK);
    std::vector<std::uint8_t> out(compressBound(static_cast<uLong>(raw.size())) + 64);
    zs.next_in = const_cast<Bytef*>(raw.data());
    zs.avail_in = static_cast<uInt>(raw.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    REQUIRE(deflate(&zs, Z_FINISH) == Z_STREAM_END);
    out.resize(zs.total_out);
    deflateEnd(&zs);
    return out;
}

// Two 2x3 images with hand-picked pixels, written byte by byte.
const std::vector<std::uint8_t> kImages{
    0x00, 0x00, 0x08, 0x03,  0x00, 0x00, 0x00, 0x02,  0x00, 0x00, 0x00, 0x02,  0x00, 0x00, 0x00, 0x03,
    0, 255, 51, 102, 153, 204,
    255, 0, 0, 1, 2, 3,
};
const std::vector<std::uint8_t> kLabels{0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x02, 7, 3};

Dataset labelled(std::vector<std::size_t> labels, std::size_t classes) {
    Dataset d;
    d.images = Tensor({labels.size(), 1});
    for (std::size_t i = 0; i < labels.size(); ++i) d.images[i] = static_cast<double>(i);
    d.labels = std::move(labels);
    d.num_classes = classes;
    return d;
}

RunReport report(std::string id, std::optional<Activation> a, std::vector<double> accs) {
    RunReport r;
    r.run_id = std::move(id);
    r.activation = std::move(a);
    for (std::size_t i = 0; i < accs.size(); ++i) r.per_epoch.push_back({i + 1, 1.0 / (i + 2.0), accs[i]});
    return r;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("idx fixture parses to the expected tensor") {
    const Tensor t = parse_idx_images(kImages);
    CHECK(t.shape() == Shape{2, 1, 2, 3});
    CHECK(t[0] == 0.0);
    CHECK(t[1] == 1.0);
    CHECK(t[2] == 51.0 / 255.0);
    CHECK(t[6] == 1.0);
    CHECK(t[11] == 3.0 / 255.0);
    const auto labels = parse_idx_labels(kLabels);
    CHECK(labels == std::vector<std::size_t>{7, 3});
}

TEST_CASE("idx errors") {
    auto bad_magic = kImages;
    bad_magic[3] = 0x01;
    CHECK_THROWS_AS(parse_idx_images(bad_magic), BadMagic);
    CHECK_THROWS_AS(parse_idx_labels(kImages), BadMagic);

    auto truncated = kImages;
    truncated.pop_back();
    CHECK_THROWS_AS(parse_idx_images(truncated), TruncatedFile);
    CHECK_THROWS_AS(parse_idx_images(std::vector<std::uint8_t>(kImages.begin(), kImages.begin() + 10)), TruncatedFile);
    auto short_labels = kLabels;
    short_labels.pop_back();
    CHECK_THROWS_AS(parse_idx_labels(short_labels), TruncatedFile);

    const fs::path dir = temp_dir();
    write_bytes(dir / "img", kImages);
    auto three = kLabels;
    three[7] = 3;
    three.push_back(1);
    write_bytes(dir / "three", three);
    CHECK_THROWS_AS(load_mnist_idx(dir / "img", dir / "three"), CountMismatch);

    auto label_eleven = kLabels;
    label_eleven[9] = 11;
    write_bytes(dir / "eleven", label_eleven);
    CHECK_THROWS_AS(load_mnist_idx(dir / "img", dir / "eleven"), LabelOutOfRange);

    CHECK_THROWS_AS(load_mnist_idx(dir / "missing", dir / "eleven"), IoError);
}

TEST_CASE("gzip and plain files load identically") {
    const fs::path dir = temp_dir();
    write_bytes(dir / "img.gz", gzip(kImages));
    write_bytes(dir / "lab.gz", gzip(kLabels));
    write_bytes(dir / "img", kImages);
    write_bytes(dir / "lab", kLabels);
    CHECK(read_file_bytes(dir / "img.gz") == kImages);
    const Dataset a = load_mnist_idx(dir / "img.gz", dir / "lab.gz");
    const Dataset b = load_mnist_idx(dir / "img", dir / "lab");
    CHECK(a.images == b.images);
    CHECK(a.labels == b.labels);
    CHECK(a.num_classes == 10);
    CHECK(a.size() == 2);

    auto broken = gzip(kImages);
    broken.resize(broken.size() / 2);
    write_bytes(dir / "broken.gz", broken);
    CHECK_THROWS_AS(read_file_bytes(dir / "broken.gz"), TruncatedFile);
}

TEST_CASE("encode then parse is the identity on 8-bit images") {
    SplitMix64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.below(5), r = 1 + rng.below(6), c = 1 + rng.below(6);
        std::vector<std::uint8_t> bytes{0, 0, 8, 3};
        for (std::size_t v : {n, r, c}) {
            for (int s = 24; s >= 0; s -= 8) bytes.push_back(static_cast<std::uint8_t>(v >> s));
        }
        for (std::size_t i = 0; i < n * r * c; ++i) bytes.push_back(static_cast<std::uint8_t>(rng.below(256)));
        CHECK(encode_idx_images(parse_idx_images(bytes)) == bytes);
    }
    const std::vector<std::size_t> labels{0, 9, 4, 4, 1};
    CHECK(parse_idx_labels(encode_idx_labels(labels)) == labels);
}

TEST_CASE("bundled mnist sample loads") {
    const fs::path dir = ARIA_MNIST_SAMPLE_DIR;
    const Dataset train = load_mnist_idx(dir / "train-images-idx3-ubyte.gz", dir / "train-labels-idx1-ubyte.gz");
    const Dataset test = load_mnist_idx(dir / "t10k-images-idx3-ubyte.gz", dir / "t10k-labels-idx1-ubyte.gz");
    CHECK(train.images.shape() == Shape{8995, 1, 28, 28});
    CHECK(test.images.shape() == Shape{1005, 1, 28, 28});
    std::map<std::size_t, std::size_t> counts;
    for (std::size_t l : test.labels) ++counts[l];
    CHECK(counts.size() == 10);
    for (double v : train.images.values()) REQUIRE((v >= 0.0 && v <= 1.0));
}

TEST_CASE("subset is stratified, deterministic and duplicate free") {
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < 300; ++i) labels.push_back(i < 200 ? i % 2 : 2 + (i % 3 == 0));
    const Dataset d = labelled(labels, 4);
    std::map<std::size_t, std::size_t> supply;
    for (std::size_t l : labels) ++supply[l];

    const auto idx = subset_indices(d, 40, 9);
    CHECK(idx == subset_indices(d, 40, 9));
    CHECK_FALSE(idx == subset_indices(d, 40, 10));
    std::vector<std::size_t> sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    std::map<std::size_t, std::size_t> counts;
    for (std::size_t i : idx) ++counts[labels[i]];
    for (const auto& [label, count] : counts) CHECK(count == 10);

    // Classes 2 and 3 run out (66 and 34 rows); the shortfall goes to 0 and 1.
    const auto big = subset_indices(d, 260, 1);
    std::map<std::size_t, std::size_t> big_counts;
    for (std::size_t i : big) ++big_counts[labels[i]];
    CHECK(big_counts[3] == supply[3]);
    CHECK(big_counts[2] == supply[2]);
    const std::size_t lo = std::min(big_counts[0], big_counts[1]);
    const std::size_t hi = std::max(big_counts[0], big_counts[1]);
    CHECK(hi - lo <= 1);

    const Dataset s = subset(d, 40, 9);
    CHECK(s.size() == 40);
    for (std::size_t i = 0; i < 40; ++i) CHECK(s.images[i] == static_cast<double>(idx[i]));
    CHECK_THROWS_AS(subset(d, 0, 1), InvalidSize);
    CHECK_THROWS_AS(subset(d, 301, 1), InvalidSize);
    CHECK(subset(d, 300, 1).size() == 300);
}

TEST_CASE("two moons geometry") {
    const Dataset d = make_two_moons(400, 0.0, 3);
    CHECK(d.images.shape() == Shape{400, 2});
    std::size_t ones = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double x = d.images[2 * i], y = d.images[2 * i + 1];
        if (d.labels[i] == 0) {
            CHECK(std::fabs(std::hypot(x, y) - 1.0) <= 1e-12);
            CHECK(y >= 0.0);
        } else {
            ++ones;
            CHECK(std::fabs(std::hypot(x - 1.0, y - 0.5) - 1.0) <= 1e-12);
            CHECK(y <= 0.5);
        }
    }
    CHECK(ones == 200);
    CHECK(make_two_moons(100, 0.1, 5).images == make_two_moons(100, 0.1, 5).images);
    CHECK_FALSE(make_two_moons(100, 0.1, 5).images == make_two_moons(100, 0.1, 6).images);
    CHECK_THROWS_AS(make_two_moons(0, 0.1, 1), InvalidSize);
    CHECK_THROWS_AS(make_two_moons(7, 0.1, 1), InvalidSize);
}

TEST_CASE("two moons at noise 0.1 is separable by nearest neighbour") {
    const Dataset d = make_two_moons(1000, 0.1, 11);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        double best = INFINITY;
        std::size_t label = 0;
        for (std::size_t j = 0; j < d.size(); ++j) {
            if (i == j) continue;
            const double dx = d.images[2 * i] - d.images[2 * j];
            const double dy = d.images[2 * i + 1] - d.images[2 * j + 1];
            const double dist = dx * dx + dy * dy;
            if (dist < best) {
                best = dist;
                label = d.labels[j];
            }
        }
        correct += label == d.labels[i];
    }
    CHECK(static_cast<double>(correct) / 1000.0 >= 0.99);
}

TEST_CASE("curve csv") {
    const std::string csv = curve_csv(Activation::relu(), -5.0, 5.0, 101);
    const auto rows = lines(csv);
    CHECK(rows.size() == 102);
    CHECK(rows[0] == "x,f,df");
    CHECK(rows[1] == "-5,0,0");
    CHECK(rows[51] == "0,0,0");
    CHECK(rows[101] == "5,5,1");
    CHECK(rows[52] == "0.1,0.1,1");

    // Numbers are written in shortest round-trip form.
    const auto a2 = lines(curve_csv(Activation::aria2(1.5, 2.0), -1.0, 1.0, 3));
    const double f = std::stod(a2[3].substr(2, a2[3].find(',', 2) - 2));
    CHECK(f == aria2({1.5, 2.0}, 1.0));

    CHECK(curve_csv(Activation::swish(1.0), -3, 3, 61) == curve_csv(Activation::aria2(1.0, 1.0), -3, 3, 61));
    CHECK_THROWS_AS(curve_csv(Activation::relu(), 0, 1, 1), InvalidParams);
    CHECK_THROWS_AS(curve_csv(Activation::relu(), 1, 1, 5), InvalidParams);
    CHECK_THROWS_AS(write_curve_csv(Activation::relu(), 0, 1, 5, "/nonexistent-dir/x.csv"), IoError);
}

TEST_CASE("run report csv") {
    const auto rows = lines(report_csv(report("r1", Activation::aria2(1.5, 2.0), {0.5, 0.75})));
    CHECK(rows.size() == 3);
    CHECK(rows[0] == "run_id,activation,alpha,beta,epoch,train_loss,test_accuracy");
    CHECK(rows[1] == "r1,aria2,1.5,2,1,0.5,0.5");
    CHECK(rows[2] == "r1,aria2,1.5,2,2,0.3333333333333333,0.75");
    CHECK(lines(report_csv(report("r", Activation::relu(), {1.0})))[1] == "r,relu,,,1,0.5,1");
    CHECK(lines(report_csv(report("r", Activation::swish(1.0), {1.0})))[1] == "r,swish,,1,1,0.5,1");
    CHECK(lines(report_csv(report("r", std::nullopt, {1.0})))[1] == "r,linear,,,1,0.5,1");
}

TEST_CASE("sweep csv ordering, checkpoints and failures") {
    std::vector<RunReport> reports{
        report("b", Activation::aria2(1.5, 2.0), std::vector<double>(12, 0.9)),
        report("a", Activation::aria2(0.5, 1.0), std::vector<double>(12, 0.8)),
        report("relu", Activation::relu(), std::vector<double>(12, 0.7)),
        report("c", Activation::aria2(1.5, 1.0), std::vector<double>(12, 0.6)),
    };
    RunReport failed;
    failed.run_id = "f";
    failed.activation = Activation::aria2(1.0, 1.0);
    failed.failed = true;
    reports.push_back(failed);

    const std::string csv = sweep_csv(reports);
    const auto rows = lines(csv);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == "run_id,activation,alpha,beta,status,epochs,final_train_loss,final_test_accuracy,acc_epoch_10");
    CHECK(rows[1] == "relu,relu,,,ok,12,0.07692307692307693,0.7,0.7");
    CHECK(rows[2].rfind("a,aria2,0.5,1,ok", 0) == 0);
    CHECK(rows[3] == "f,aria2,1,1,failed,,,,");
    CHECK(rows[4].rfind("c,aria2,1.5,1,", 0) == 0);
    CHECK(rows[5].rfind("b,aria2,1.5,2,", 0) == 0);
    CHECK(csv == sweep_csv(reports));

    std::reverse(reports.begin(), reports.end());
    CHECK(sweep_csv(reports) == csv);

    const auto fewer = lines(sweep_csv({report("x", Activation::relu(), {0.5, 0.6})}));
    CHECK(fewer[0] == "run_id,activation,alpha,beta,status,epochs,final_train_loss,final_test_accuracy");
    const auto custom = lines(sweep_csv({report("x", Activation::relu(), {0.5, 0.6, 0.7})}, {1, 3, 4}));
    CHECK(custom[0] == "run_id,activation,alpha,beta,status,epochs,final_train_loss,final_test_accuracy,acc_epoch_1,acc_epoch_3");
    CHECK(custom[1] == "x,relu,,,ok,3,0.25,0.7,0.5,0.7");

    const fs::path out = temp_dir() / "sweep.csv";
    write_sweep_csv(reports, out);
    std::ifstream in(out, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == csv);
}
