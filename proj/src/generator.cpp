#include "planestack/generator.hpp"

#include <string>

namespace planestack {

void SamplerConfig::validate() const {
    if (!(low >= 0.0 && low <= high && high <= 1.0)) {
        throw InvalidArgument("sampler band must satisfy 0 <= low <= high <= 1");
    }
    if (depth < 2 || depth > kMaxDepth) {
        throw InvalidArgument("generation depth must be in 2..8, got " + std::to_string(depth));
    }
    if (threads < 1) throw InvalidArgument("threads must be >= 1");
}

RealPlane activation_map(const ConvLogisticModel& model, std::span<const BinaryPlane> parents,
                         CorrelationMethod method, int threads) {
    if (parents.size() != static_cast<std::size_t>(model.parents())) {
        throw InvalidArgument("model for B_" + std::to_string(model.target()) + " needs " +
                              std::to_string(model.parents()) + " parent planes, got " +
                              std::to_string(parents.size()));
    }
    std::vector<std::span<const double>> kernels;
    for (int k = 1; k <= model.parents(); ++k) kernels.push_back(model.kernel(k));
    auto logits = correlate_valid(parents, kernels, model.side(), model.bias(), method, threads);
    for (auto& v : logits.pixels()) v = sigmoid(v);
    return logits;
}

std::uint64_t plane_stream(std::uint64_t seed, int target) {
    return derive_stream(seed, static_cast<std::uint64_t>(target));
}

BinaryPlane sample_plane(const RealPlane& activations, const SamplerConfig& cfg,
                         std::uint64_t stream) {
    if (!(cfg.low >= 0.0 && cfg.low <= cfg.high && cfg.high <= 1.0)) {
        throw InvalidArgument("sampler band must satisfy 0 <= low <= high <= 1");
    }
    const bool band = cfg.low < cfg.high;
    std::vector<std::uint8_t> bits(activations.size());
    auto act = activations.pixels();
    for (std::size_t i = 0; i < bits.size(); ++i) {
        const double a = act[i];
        if (band && a >= cfg.low && a <= cfg.high) {
            bits[i] = counter_uniform(stream, i) < a ? 1 : 0;
        } else {
            bits[i] = a >= cfg.high ? 1 : 0;
        }
    }
    return BinaryPlane(activations.width(), activations.height(), std::move(bits));
}

int cascade_border(int side, int steps) { return steps * (side / 2); }

BitplaneStack generate_stack(const BinaryPlane& b1, std::span<const ConvLogisticModel> models,
                             const SamplerConfig& cfg) {
    cfg.validate();
    if (models.size() != static_cast<std::size_t>(cfg.depth - 1)) {
        throw InvalidArgument("depth " + std::to_string(cfg.depth) + " needs " +
                              std::to_string(cfg.depth - 1) + " models, got " +
                              std::to_string(models.size()));
    }
    const int side = models.front().side();
    for (std::size_t i = 0; i < models.size(); ++i) {
        if (models[i].target() != static_cast<int>(i) + 2) {
            throw InvalidArgument("models must be ordered B_2..B_depth");
        }
        if (models[i].side() != side) throw InvalidArgument("all models must share one kernel side");
    }
    const int shrink = (cfg.depth - 1) * (side - 1);
    if (b1.width() <= shrink || b1.height() <= shrink) {
        throw InvalidArgument("B_1 of " + std::to_string(b1.width()) + "x" +
                              std::to_string(b1.height()) + " is too small for " +
                              std::to_string(cfg.depth - 1) + " cascade steps with side " +
                              std::to_string(side));
    }

    const int half = side / 2;
    std::vector<BinaryPlane> planes{b1};
    for (const auto& model : models) {
        const auto act = activation_map(model, planes, CorrelationMethod::Auto, cfg.threads);
        for (auto& p : planes) p = crop(p, half);
        planes.push_back(sample_plane(act, cfg, plane_stream(cfg.seed, model.target())));
    }
    return BitplaneStack(std::move(planes));
}

GeneratedImage generate_image(const GrayImage& source, std::span<const ConvLogisticModel> models,
                              const SamplerConfig& cfg) {
    cfg.validate();
    if (models.empty()) throw InvalidArgument("generation needs at least one model");
    const auto source_stack = decompose_image(source, 1);
    GeneratedImage out;
    out.stack = generate_stack(source_stack.plane(1), models, cfg);
    out.image = recompose(out.stack);
    out.border = cascade_border(models.front().side(), cfg.depth - 1);
    out.source_crop = crop(source, out.border);
    return out;
}

std::vector<ConvLogisticModel> null_models(int depth, int side) {
    std::vector<ConvLogisticModel> models;
    for (int t = 2; t <= depth; ++t) models.emplace_back(t, side);
    return models;
}

}  // namespace planestack
