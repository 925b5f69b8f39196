#include "aonkit/model.hpp"

#include "aonkit/error.hpp"

#include <sstream>

namespace aonkit {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 finaliser
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<std::size_t> parse_widths(const std::string& list) {
    std::vector<std::size_t> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        long long v = 0;
        try {
            v = std::stoll(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != item.size() || v <= 0) throw ConfigError("arch: bad width '" + item + "'");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

} // namespace

Model::Model(const Model& other) {
    layers_.reserve(other.layers_.size());
    for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Model& Model::operator=(const Model& other) {
    if (this != &other) {
        Model tmp(other);
        *this = std::move(tmp);
    }
    return *this;
}

Tensor4 Model::forward(const Tensor4& x, Pass pass) {
    Tensor4 a = x;
    for (auto& l : layers_) a = l->forward(a, pass);
    return a;
}

Tensor4 Model::backward(const Tensor4& grad_out) {
    Tensor4 g = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
}

std::vector<ParamRef> Model::params() {
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < layers_.size(); ++i)
        for (auto& p : layers_[i]->params()) {
            p.name = std::to_string(i) + "." + p.name;
            out.push_back(std::move(p));
        }
    return out;
}

void Model::zero_grad() {
    for (auto& l : layers_) l->zero_grad();
}

void Model::freeze() {
    for (auto& l : layers_) l->freeze();
}

bool Model::frozen() const {
    for (const auto& l : layers_)
        if (l->frozen()) return true;
    return false;
}

std::vector<NormalizedWeight*> Model::weights() {
    std::vector<NormalizedWeight*> out;
    for (auto& l : layers_) {
        if (auto* d = dynamic_cast<DenseLayer*>(l.get())) out.push_back(&d->weight());
        if (auto* c = dynamic_cast<ConvLayer*>(l.get())) out.push_back(&c->weight());
    }
    return out;
}

std::vector<const NormalizedWeight*> Model::weights() const {
    std::vector<const NormalizedWeight*> out;
    for (const auto& l : layers_) {
        if (const auto* d = dynamic_cast<const DenseLayer*>(l.get())) out.push_back(&d->weight());
        if (const auto* c = dynamic_cast<const ConvLayer*>(l.get())) out.push_back(&c->weight());
    }
    return out;
}

Model build_model(const ModelSpec& spec) {
    const auto colon = spec.arch.find(':');
    const std::string family = spec.arch.substr(0, colon);
    const auto widths = colon == std::string::npos ? std::vector<std::size_t>{} : parse_widths(spec.arch.substr(colon + 1));
    if (spec.classes < 2) throw ConfigError("model: need at least 2 classes");

    Model model;
    std::uint64_t index = 0;
    if (family == "mlp") {
        std::size_t in = spec.input[0] * spec.input[1] * spec.input[2];
        for (std::size_t width : widths) {
            model.add(std::make_unique<DenseLayer>(in, width, spec.weights, mix_seed(spec.seed, index++)));
            if (spec.batchnorm) model.add(std::make_unique<BatchNormLayer>(width));
            model.add(std::make_unique<ReluLayer>());
            in = width;
        }
        model.add(std::make_unique<DenseLayer>(in, spec.classes, spec.weights, mix_seed(spec.seed, index++)));
    } else if (family == "conv") {
        if (widths.empty()) throw ConfigError("arch: conv needs at least one channel count");
        std::size_t channels = spec.input[0], h = spec.input[1], w = spec.input[2];
        for (std::size_t out : widths) {
            model.add(std::make_unique<ConvLayer>(channels, out, ConvGeometry{}, spec.weights,
                                                  mix_seed(spec.seed, index++)));
            if (spec.batchnorm) model.add(std::make_unique<BatchNormLayer>(out));
            model.add(std::make_unique<ReluLayer>());
            model.add(std::make_unique<MaxPoolLayer>());
            channels = out;
            h /= 2;
            w /= 2;
            if (h == 0 || w == 0) throw ConfigError("arch: too many pooling stages for the input size");
        }
        model.add(std::make_unique<DenseLayer>(channels * h * w, spec.classes, spec.weights,
                                               mix_seed(spec.seed, index++)));
    } else {
        throw ConfigError("arch: unknown family '" + family + "' (expected mlp or conv)");
    }
    return model;
}

std::unique_ptr<Layer> layer_from_description(const nlohmann::json& desc) {
    const std::string type = desc.at("type").get<std::string>();
    auto weight_options = [&] {
        WeightOptions o;
        o.norm = parse_norm_mode(desc.at("norm").get<std::string>());
        o.q = desc.at("q").get<int>();
        o.aon_mode = desc.at("pre_sn").get<bool>() ? AonMode::pre_sn : AonMode::standard;
        o.use_gamma = desc.at("gamma").get<bool>();
        o.use_bias = desc.at("bias").get<bool>();
        return o;
    };
    if (type == "dense") {
        const auto rows = desc.at("rows").get<std::size_t>();
        const auto cols = desc.at("cols").get<std::size_t>();
        return std::make_unique<DenseLayer>(Matrix(rows, cols), weight_options(), 0);
    }
    if (type == "conv") {
        ConvGeometry g;
        g.kh = desc.at("kh").get<std::size_t>();
        g.kw = desc.at("kw").get<std::size_t>();
        g.stride = desc.at("stride").get<std::size_t>();
        g.padding = desc.at("padding").get<std::size_t>();
        const Tensor4 kernel(desc.at("out_channels").get<std::size_t>(), desc.at("in_channels").get<std::size_t>(),
                             g.kh, g.kw);
        return std::make_unique<ConvLayer>(kernel, g, weight_options(), 0);
    }
    if (type == "batchnorm") {
        auto bn = std::make_unique<BatchNormLayer>(desc.at("channels").get<std::size_t>(), desc.at("eps").get<double>(),
                                                   desc.at("momentum").get<double>());
        if (desc.at("frozen").get<bool>()) bn->freeze();
        return bn;
    }
    if (type == "relu") return std::make_unique<ReluLayer>();
    if (type == "maxpool") return std::make_unique<MaxPoolLayer>();
    throw FormatError("checkpoint: unknown layer type '" + type + "'");
}

} // namespace aonkit
