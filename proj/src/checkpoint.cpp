#include "aonkit/error.hpp"
#include "aonkit/model.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace aonkit {

namespace {

constexpr std::size_t kMagicLen = 8;
constexpr std::uint8_t kFlagTrainable = 0;
constexpr std::uint8_t kFlagFrozen = 1;

void write_u64_le(std::ostream& os, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64_le(std::istream& is) {
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char*>(buf), 8)) throw FormatError("checkpoint: truncated header");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_f64_le(std::ostream& os, const std::vector<double>& xs) {
    for (double x : xs) write_u64_le(os, std::bit_cast<std::uint64_t>(x));
}

std::vector<double> read_f64_le(std::istream& is, std::size_t count) {
    std::vector<double> out(count);
    for (auto& x : out) x = std::bit_cast<double>(read_u64_le(is));
    return out;
}

std::size_t element_count(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

} // namespace

void save_checkpoint(std::ostream& os, const Model& model) {
    nlohmann::json manifest;
    manifest["format_version"] = 1;
    manifest["layers"] = nlohmann::json::array();
    std::vector<std::vector<TensorBlob>> payloads;
    for (std::size_t i = 0; i < model.size(); ++i) {
        auto desc = model.layer(i).describe();
        auto blobs = model.layer(i).export_tensors();
        desc["tensors"] = nlohmann::json::array();
        for (const auto& b : blobs) desc["tensors"].push_back({{"name", b.name}, {"shape", b.shape}});
        manifest["layers"].push_back(std::move(desc));
        payloads.push_back(std::move(blobs));
    }
    const std::string text = manifest.dump();

    os.write(kCheckpointMagic, kMagicLen);
    const std::uint8_t flag = model.frozen() ? kFlagFrozen : kFlagTrainable;
    os.put(static_cast<char>(flag));
    write_u64_le(os, text.size());
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& blobs : payloads)
        for (const auto& b : blobs) write_f64_le(os, b.data);
    if (!os) throw std::runtime_error("checkpoint: write failed");
}

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open '" + path.string() + "' for writing");
    save_checkpoint(os, model);
}

Model load_checkpoint(std::istream& is) {
    char magic[kMagicLen];
    if (!is.read(magic, kMagicLen) || std::memcmp(magic, kCheckpointMagic, kMagicLen) != 0)
        throw FormatError("checkpoint: bad magic");
    const int flag = is.get();
    if (flag != kFlagTrainable && flag != kFlagFrozen) throw FormatError("checkpoint: bad flag byte");
    const std::uint64_t len = read_u64_le(is);
    if (len > (1ULL << 30)) throw FormatError("checkpoint: manifest too large");
    std::string text(len, '\0');
    if (!is.read(text.data(), static_cast<std::streamsize>(len))) throw FormatError("checkpoint: truncated manifest");

    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint: bad manifest: ") + e.what());
    }

    Model model;
    try {
        for (const auto& desc : manifest.at("layers")) {
            auto layer = layer_from_description(desc);
            std::vector<TensorBlob> blobs;
            for (const auto& t : desc.at("tensors")) {
                TensorBlob b;
                b.name = t.at("name").get<std::string>();
                b.shape = t.at("shape").get<std::vector<std::size_t>>();
                b.data = read_f64_le(is, element_count(b.shape));
                blobs.push_back(std::move(b));
            }
            layer->import_tensors(blobs);
            model.add(std::move(layer));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint: bad manifest: ") + e.what());
    }
    if ((flag == kFlagFrozen) != model.frozen()) throw FormatError("checkpoint: flag byte disagrees with manifest");
    return model;
}

Model load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open '" + path.string() + "'");
    return load_checkpoint(is);
}

} // namespace aonkit
