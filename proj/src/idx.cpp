#include <zlib.h>

#include <cmath>
#include <fstream>
#include <iterator>

#include "aria/data.hpp"
#include "aria/errors.hpp"

namespace aria {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::string hex(std::uint32_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s = "0x";
    for (int shift = 28; shift >= 0; shift -= 4) s += digits[(v >> shift) & 0xf];
    return s;
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in, const std::string& name) {
    z_stream zs{};
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw IoError("zlib init failed for " + name);
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());

    std::vector<std::uint8_t> out;
    std::vector<std::uint8_t> chunk(1 << 16);
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = chunk.data();
        zs.avail_out = static_cast<uInt>(chunk.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            if (rc == Z_BUF_ERROR) throw TruncatedFile(name + ": gzip stream ends early");
            throw IoError(name + ": corrupt gzip stream");
        }
        out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - zs.avail_out));
    }
    inflateEnd(&zs);
    return out;
}

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed for " + path.string());
    if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) return gunzip(bytes, path.string());
    return bytes;
}

Tensor parse_idx_images(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 16) throw TruncatedFile("IDX image header needs 16 bytes");
    const std::uint32_t magic = read_be32(bytes, 0);
    if (magic != kIdxImageMagic) {
        throw BadMagic("IDX image magic " + hex(magic) + ", expected " + hex(kIdxImageMagic));
    }
    const std::size_t n = read_be32(bytes, 4);
    const std::size_t rows = read_be32(bytes, 8);
    const std::size_t cols = read_be32(bytes, 12);
    const std::size_t count = n * rows * cols;
    if (bytes.size() < 16 + count) {
        throw TruncatedFile("IDX image payload has " + std::to_string(bytes.size() - 16) +
                            " bytes, header declares " + std::to_string(count));
    }
    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i) data[i] = static_cast<double>(bytes[16 + i]) / 255.0;
    return Tensor({n, 1, rows, cols}, std::move(data));
}

std::vector<std::size_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8) throw TruncatedFile("IDX label header needs 8 bytes");
    const std::uint32_t magic = read_be32(bytes, 0);
    if (magic != kIdxLabelMagic) {
        throw BadMagic("IDX label magic " + hex(magic) + ", expected " + hex(kIdxLabelMagic));
    }
    const std::size_t n = read_be32(bytes, 4);
    if (bytes.size() < 8 + n) {
        throw TruncatedFile("IDX label payload has " + std::to_string(bytes.size() - 8) +
                            " bytes, header declares " + std::to_string(n));
    }
    return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(n)};
}

std::vector<std::uint8_t> encode_idx_images(const Tensor& images) {
    if (images.rank() < 3) throw ShapeMismatch("IDX images need (n, [c,] rows, cols)");
    const std::size_t n = images.extent(0);
    const std::size_t rows = images.extent(images.rank() - 2);
    const std::size_t cols = images.extent(images.rank() - 1);
    if (n * rows * cols != images.size()) throw ShapeMismatch("IDX images must be single-channel");
    std::vector<std::uint8_t> out;
    out.reserve(16 + images.size());
    write_be32(out, kIdxImageMagic);
    write_be32(out, static_cast<std::uint32_t>(n));
    write_be32(out, static_cast<std::uint32_t>(rows));
    write_be32(out, static_cast<std::uint32_t>(cols));
    for (double v : images.values()) {
        const double scaled = std::round(v * 255.0);
        out.push_back(static_cast<std::uint8_t>(scaled < 0 ? 0 : scaled > 255 ? 255 : scaled));
    }
    return out;
}

std::vector<std::uint8_t> encode_idx_labels(std::span<const std::size_t> labels) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + labels.size());
    write_be32(out, kIdxLabelMagic);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    for (std::size_t l : labels) {
        if (l > 255) throw LabelOutOfRange("IDX labels are single bytes");
        out.push_back(static_cast<std::uint8_t>(l));
    }
    return out;
}

Dataset load_mnist_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path) {
    Dataset d;
    d.images = parse_idx_images(read_file_bytes(images_path));
    d.labels = parse_idx_labels(read_file_bytes(labels_path));
    if (d.images.extent(0) != d.labels.size()) {
        throw CountMismatch(images_path.string() + " holds " + std::to_string(d.images.extent(0)) +
                            " images but " + labels_path.string() + " holds " +
                            std::to_string(d.labels.size()) + " labels");
    }
    for (std::size_t i = 0; i < d.labels.size(); ++i) {
        if (d.labels[i] > 9) {
            throw LabelOutOfRange("label " + std::to_string(d.labels[i]) + " at index " +
                                  std::to_string(i) + " exceeds 9");
        }
    }
    d.num_classes = 10;
    d.split_name = images_path.filename().string();
    return d;
}

}  // namespace aria
