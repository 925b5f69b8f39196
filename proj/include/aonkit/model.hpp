#pragma once

#include "aonkit/layers.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace aonkit {

struct ModelSpec {
    // "mlp:64,64" (hidden widths; "mlp" alone is a linear classifier) or
    // "conv:8,16" (3x3 conv + BN + ReLU + 2x2 max-pool per entry, then a
    // dense classifier).
    std::string arch = "mlp:64,64";
    std::array<std::size_t, 3> input{2, 1, 1}; // C, H, W
    std::size_t classes = 2;
    WeightOptions weights;
    bool batchnorm = true;
    std::uint64_t seed = 0;
};

// Layer order per block: weight layer (with normalisation and gamma) -> BN ->
// ReLU. The final classifier has no BN or ReLU.
class Model {
public:
    Model() = default;
    Model(const Model& other);
    Model& operator=(const Model& other);
    Model(Model&&) noexcept = default;
    Model& operator=(Model&&) noexcept = default;

    void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
    std::size_t size() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_[i]; }
    const Layer& layer(std::size_t i) const { return *layers_[i]; }

    Tensor4 forward(const Tensor4& x, Pass pass);
    Tensor4 backward(const Tensor4& grad_out);
    std::vector<ParamRef> params();
    void zero_grad();

    // Freezes every AON weight (h cached) and switches BN to running stats.
    void freeze();
    bool frozen() const;

    // Weight layers in order (dense and conv).
    std::vector<NormalizedWeight*> weights();
    std::vector<const NormalizedWeight*> weights() const;

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

Model build_model(const ModelSpec& spec);

// Reconstructs a layer from Layer::describe() output (no tensors loaded).
std::unique_ptr<Layer> layer_from_description(const nlohmann::json& desc);

// Binary checkpoint:
//   "AONKIT01" | flag byte (0 trainable, 1 frozen) | u64 LE manifest length |
//   JSON manifest (layer list with shapes and mode flags, tensor order) |
//   raw little-endian float64 payloads in manifest order.
void save_checkpoint(std::ostream& os, const Model& model);
void save_checkpoint(const std::filesystem::path& path, const Model& model);
Model load_checkpoint(std::istream& is);
Model load_checkpoint(const std::filesystem::path& path);

inline constexpr char kCheckpointMagic[] = "AONKIT01";

} // namespace aonkit
