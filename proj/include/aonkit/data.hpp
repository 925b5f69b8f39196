#pragma once

// Desk-scale datasets: seeded synthetic 2-D generators and IDX image files.

#include "aonkit/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace aonkit {

enum class Split { train, validation };

struct Dataset {
    Tensor4 inputs; // N x C x H x W
    std::vector<int> labels;
    std::size_t class_count = 0;
    Split split = Split::train;

    std::size_t size() const { return labels.size(); }
};

// Class means evenly spaced on the unit circle, isotropic Gaussian spread.
// Samples are ordered by class. Inputs are N x 2 x 1 x 1.
Dataset gen_blobs(std::size_t classes, std::size_t per_class, double spread, std::uint64_t seed);

// Interleaved Archimedean arms: class k, sample i has radius r = (i + 0.5) / n
// and angle 2*pi*k/classes + 3*pi*r + noise * N(0, 1).
Dataset gen_spirals(std::size_t classes, std::size_t per_class, double noise, std::uint64_t seed);

// IDX (big-endian) readers. Images: magic 0x00000803, then N, rows, cols and
// N*rows*cols unsigned bytes, scaled by 1/255 into N x 1 x rows x cols.
// Labels: magic 0x00000801, then N and N unsigned bytes.
// Throw FormatError on a bad magic and on truncation.
Tensor4 load_idx_images(const std::filesystem::path& path);
std::vector<int> load_idx_labels(const std::filesystem::path& path);
// Writers; pixels are rounded from [0,1] to bytes, labels must fit a byte.
void write_idx_images(const std::filesystem::path& path, const Tensor4& images);
void write_idx_labels(const std::filesystem::path& path, const std::vector<int>& labels);

// Per-feature affine map fitted on a training split: population mean and
// variance; zero-variance features are centred but not scaled.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale; // 1/stddev, or 1 for constant features

    static Standardizer fit(const Dataset& train);
    Dataset apply(Dataset d) const;
};

// Standardises both splits with statistics from `train`.
void standardize(Dataset& train, Dataset& validation);
Dataset standardize(const Dataset& d);

struct DataBundle {
    Dataset train;
    Dataset validation;
};

struct DatasetOptions {
    std::string source = "blobs"; // blobs | spirals | idx:DIR
    std::size_t classes = 2;
    std::size_t per_class = 200;     // training samples per class (synthetic)
    std::size_t val_per_class = 200; // validation samples per class (synthetic)
    double noise = 0.2;              // blobs spread or spirals angular noise
    std::size_t idx_limit = 0;       // cap on IDX samples per split, 0 = all
};

// Builds train/validation splits and standardises them. IDX directories must
// contain train-images-idx3-ubyte, train-labels-idx1-ubyte,
// t10k-images-idx3-ubyte and t10k-labels-idx1-ubyte.
DataBundle make_data(const DatasetOptions& opts, std::uint64_t seed);

} // namespace aonkit
