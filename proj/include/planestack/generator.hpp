#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "planestack/codec.hpp"
#include "planestack/conv_logistic.hpp"
#include "planestack/correlate.hpp"
#include "planestack/random.hpp"

namespace planestack {

struct SamplerConfig {
    /// Activations inside [low, high] are sampled; below low -> 0, above high -> 1.
    /// A degenerate band (low == high) samples nothing: a >= high -> 1.
    double low = 0.4;
    double high = 0.6;
    std::uint64_t seed = 0;
    int depth = kDefaultDepth;
    int threads = 1;

    void validate() const;
};

/// Logistic activation of the model at every position where its kernels fit inside the parents:
/// (H - L + 1) x (W - L + 1) values in (0, 1).
RealPlane activation_map(const ConvLogisticModel& model, std::span<const BinaryPlane> parents,
                         CorrelationMethod method = CorrelationMethod::Auto, int threads = 1);

/// Random stream used for bitplane `target` under `seed`.
std::uint64_t plane_stream(std::uint64_t seed, int target);

/// Winner-take-all outside [low, high], Bernoulli(a) inside. The draw for pixel i (row-major)
/// depends only on (stream, i).
BinaryPlane sample_plane(const RealPlane& activations, const SamplerConfig& cfg,
                         std::uint64_t stream);

/// Border removed from B_1 by a cascade of `steps` valid convolutions with side `side`.
int cascade_border(int side, int steps);

/// Generates B_2..B_depth from B_1. models[i] models B_{i+2}; all share one side L. Every
/// step shrinks the extent by L-1 per axis, so the stack is
/// (H - (depth-1)(L-1)) x (W - (depth-1)(L-1)).
BitplaneStack generate_stack(const BinaryPlane& b1, std::span<const ConvLogisticModel> models,
                             const SamplerConfig& cfg);

struct GeneratedImage {
    GrayImage image;          // recomposed generated stack
    BitplaneStack stack;      // generated planes, B_1 copied from the source
    GrayImage source_crop;    // source pixels aligned with `image`
    int border = 0;           // pixels removed from each side of the source
};

/// Decomposes the source, keeps its B_1, generates the remaining planes and recomposes.
GeneratedImage generate_image(const GrayImage& source, std::span<const ConvLogisticModel> models,
                              const SamplerConfig& cfg);

/// All-zero models for B_2..B_depth, the null generator.
std::vector<ConvLogisticModel> null_models(int depth, int side);

}  // namespace planestack
