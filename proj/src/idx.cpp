#include "aonkit/data.hpp"
#include "aonkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>

namespace aonkit {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("idx: cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& buf, std::size_t off) {
    if (off + 4 > buf.size()) throw FormatError("idx: truncated header");
    return (std::uint32_t{buf[off]} << 24) | (std::uint32_t{buf[off + 1]} << 16) | (std::uint32_t{buf[off + 2]} << 8) |
           std::uint32_t{buf[off + 3]};
}

void put_be32(std::ofstream& os, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                       static_cast<char>(v)};
    os.write(b, 4);
}

} // namespace

Tensor4 load_idx_images(const std::filesystem::path& path) {
    const auto buf = slurp(path);
    if (be32(buf, 0) != kImageMagic) throw FormatError("idx: bad image magic in '" + path.string() + "'");
    const std::size_t n = be32(buf, 4), rows = be32(buf, 8), cols = be32(buf, 12);
    const std::size_t count = n * rows * cols;
    if (buf.size() < 16 + count) throw FormatError("idx: truncated image payload in '" + path.string() + "'");
    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i) data[i] = static_cast<double>(buf[16 + i]) / 255.0;
    return Tensor4({n, 1, rows, cols}, std::move(data));
}

std::vector<int> load_idx_labels(const std::filesystem::path& path) {
    const auto buf = slurp(path);
    if (be32(buf, 0) != kLabelMagic) throw FormatError("idx: bad label magic in '" + path.string() + "'");
    const std::size_t n = be32(buf, 4);
    if (buf.size() < 8 + n) throw FormatError("idx: truncated label payload in '" + path.string() + "'");
    return std::vector<int>(buf.begin() + 8, buf.begin() + 8 + static_cast<std::ptrdiff_t>(n));
}

void write_idx_images(const std::filesystem::path& path, const Tensor4& images) {
    if (images.c() != 1) throw ShapeError("idx: images must have one channel");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("idx: cannot open '" + path.string() + "' for writing");
    put_be32(os, kImageMagic);
    put_be32(os, static_cast<std::uint32_t>(images.n()));
    put_be32(os, static_cast<std::uint32_t>(images.h()));
    put_be32(os, static_cast<std::uint32_t>(images.w()));
    for (double x : images.span()) {
        const double b = std::round(std::clamp(x, 0.0, 1.0) * 255.0);
        os.put(static_cast<char>(static_cast<unsigned char>(b)));
    }
}

void write_idx_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("idx: cannot open '" + path.string() + "' for writing");
    put_be32(os, kLabelMagic);
    put_be32(os, static_cast<std::uint32_t>(labels.size()));
    for (int l : labels) {
        if (l < 0 || l > 255) throw InputError("idx: label does not fit in a byte");
        os.put(static_cast<char>(static_cast<unsigned char>(l)));
    }
}

} // namespace aonkit
