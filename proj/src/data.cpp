#include "aonkit/data.hpp"

#include "aonkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace aonkit {

namespace {

void require_counts(std::size_t classes, std::size_t per_class) {
    if (classes < 1 || per_class < 1) throw InputError("dataset generator: counts must be >= 1");
}

} // namespace

Dataset gen_blobs(std::size_t classes, std::size_t per_class, double spread, std::uint64_t seed) {
    require_counts(classes, per_class);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    Dataset d;
    d.class_count = classes;
    d.inputs = Tensor4(classes * per_class, 2, 1, 1);
    d.labels.reserve(classes * per_class);
    std::size_t i = 0;
    for (std::size_t k = 0; k < classes; ++k) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(classes);
        for (std::size_t j = 0; j < per_class; ++j, ++i) {
            d.inputs(i, 0, 0, 0) = std::cos(angle) + spread * noise(rng);
            d.inputs(i, 1, 0, 0) = std::sin(angle) + spread * noise(rng);
            d.labels.push_back(static_cast<int>(k));
        }
    }
    return d;
}

Dataset gen_spirals(std::size_t classes, std::size_t per_class, double noise, std::uint64_t seed) {
    require_counts(classes, per_class);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> jitter(0.0, 1.0);
    Dataset d;
    d.class_count = classes;
    d.inputs = Tensor4(classes * per_class, 2, 1, 1);
    d.labels.reserve(classes * per_class);
    std::size_t i = 0;
    for (std::size_t k = 0; k < classes; ++k) {
        const double offset = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(classes);
        for (std::size_t j = 0; j < per_class; ++j, ++i) {
            const double r = (static_cast<double>(j) + 0.5) / static_cast<double>(per_class);
            const double theta = offset + 3.0 * std::numbers::pi * r + noise * jitter(rng);
            d.inputs(i, 0, 0, 0) = r * std::cos(theta);
            d.inputs(i, 1, 0, 0) = r * std::sin(theta);
            d.labels.push_back(static_cast<int>(k));
        }
    }
    return d;
}

Standardizer Standardizer::fit(const Dataset& train) {
    if (train.size() == 0) throw InputError("standardize: empty dataset");
    const std::size_t f = train.inputs.sample_size();
    const double n = static_cast<double>(train.size());
    Standardizer s;
    s.mean.assign(f, 0.0);
    s.scale.assign(f, 1.0);
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto x = train.inputs.sample(i);
        for (std::size_t j = 0; j < f; ++j) s.mean[j] += x[j];
    }
    for (double& m : s.mean) m /= n;
    std::vector<double> var(f, 0.0);
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto x = train.inputs.sample(i);
        for (std::size_t j = 0; j < f; ++j) {
            const double d = x[j] - s.mean[j];
            var[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < f; ++j) {
        const double v = var[j] / n;
        s.scale[j] = v > 0.0 ? 1.0 / std::sqrt(v) : 1.0;
    }
    return s;
}

Dataset Standardizer::apply(Dataset d) const {
    const std::size_t f = d.inputs.sample_size();
    if (f != mean.size()) throw ShapeError("standardize: feature count mismatch");
    for (std::size_t i = 0; i < d.size(); ++i) {
        auto x = d.inputs.sample(i);
        for (std::size_t j = 0; j < f; ++j) x[j] = (x[j] - mean[j]) * scale[j];
    }
    return d;
}

void standardize(Dataset& train, Dataset& validation) {
    const auto s = Standardizer::fit(train);
    train = s.apply(std::move(train));
    validation = s.apply(std::move(validation));
}

Dataset standardize(const Dataset& d) { return Standardizer::fit(d).apply(d); }

DataBundle make_data(const DatasetOptions& opts, std::uint64_t seed) {
    DataBundle b;
    // Validation draws use an independent stream.
    const std::uint64_t val_seed = seed ^ 0xa5a5a5a55a5a5a5aULL;
    if (opts.source == "blobs") {
        b.train = gen_blobs(opts.classes, opts.per_class, opts.noise, seed);
        b.validation = gen_blobs(opts.classes, opts.val_per_class, opts.noise, val_seed);
    } else if (opts.source == "spirals") {
        b.train = gen_spirals(opts.classes, opts.per_class, opts.noise, seed);
        b.validation = gen_spirals(opts.classes, opts.val_per_class, opts.noise, val_seed);
    } else if (opts.source.rfind("idx:", 0) == 0) {
        const std::filesystem::path dir = opts.source.substr(4);
        auto load = [&](const char* images, const char* labels) {
            Dataset d;
            d.inputs = load_idx_images(dir / images);
            d.labels = load_idx_labels(dir / labels);
            if (d.labels.size() != d.inputs.n()) throw FormatError("idx: image and label counts differ");
            if (opts.idx_limit > 0 && opts.idx_limit < d.size()) {
                const std::size_t keep = opts.idx_limit;
                const auto& dims = d.inputs.dims();
                std::vector<double> data(d.inputs.span().begin(),
                                         d.inputs.span().begin() + static_cast<std::ptrdiff_t>(keep * d.inputs.sample_size()));
                d.inputs = Tensor4({keep, dims[1], dims[2], dims[3]}, std::move(data));
                d.labels.resize(keep);
            }
            int max_label = 0;
            for (int l : d.labels) max_label = std::max(max_label, l);
            d.class_count = static_cast<std::size_t>(max_label) + 1;
            return d;
        };
        b.train = load("train-images-idx3-ubyte", "train-labels-idx1-ubyte");
        b.validation = load("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte");
        const std::size_t classes = std::max(b.train.class_count, b.validation.class_count);
        b.train.class_count = b.validation.class_count = classes;
    } else {
        throw ConfigError("unknown dataset '" + opts.source + "' (expected blobs, spirals or idx:DIR)");
    }
    b.train.split = Split::train;
    b.validation.split = Split::validation;
    standardize(b.train, b.validation);
    return b;
}

} // namespace aonkit
