#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "planestack/codec.hpp"

namespace planestack {

enum class Split { Train, Holdout };

inline constexpr double kDefaultHoldoutFraction = 0.1;

/// Ordered image list plus a per-image train/held-out assignment. Paths are sorted
/// lexicographically and the split is a pure function of (seed, paths, fraction).
struct CorpusManifest {
    std::vector<std::string> paths;
    std::uint64_t seed = 0;
    std::vector<bool> holdout;

    std::vector<std::string> select(Split split) const;
    friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

/// Held-out count is round(fraction * n), kept within [1, n-1] whenever n >= 2 and fraction > 0.
CorpusManifest make_manifest(std::vector<std::string> paths, std::uint64_t seed,
                             double holdout_fraction = kDefaultHoldoutFraction);

/// Every *.pgm directly inside `dir`.
CorpusManifest scan_corpus(const std::filesystem::path& dir, std::uint64_t seed,
                           double holdout_fraction = kDefaultHoldoutFraction);

/// Text form: "seed <n>", "holdout <paths...>", then one path per line.
std::string format_manifest(const CorpusManifest& manifest);
CorpusManifest parse_manifest(std::string_view text);

/// Where a sample came from: image index within the sampled set and patch center.
struct PatchOrigin {
    std::uint32_t image = 0;
    std::int32_t row = 0;
    std::int32_t col = 0;
    friend bool operator==(const PatchOrigin&, const PatchOrigin&) = default;
};

/// Training samples for P(B_target | B_1..B_{target-1}). Each sample stores the parent
/// patches back to back (parent 1 first, each side x side row-major) and the target bit
/// at the patch center.
class PatchBatch {
public:
    PatchBatch(int target, int side);

    int target() const noexcept { return target_; }
    int side() const noexcept { return side_; }
    int parents() const noexcept { return target_ - 1; }
    std::size_t features_per_sample() const noexcept {
        return static_cast<std::size_t>(parents()) * side_ * side_;
    }
    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }

    std::span<const std::uint8_t> features(std::size_t i) const {
        return std::span(features_).subspan(i * features_per_sample(), features_per_sample());
    }
    std::uint8_t label(std::size_t i) const { return labels_[i]; }
    const PatchOrigin& origin(std::size_t i) const { return origins_[i]; }
    std::span<const std::uint8_t> labels() const noexcept { return labels_; }

    void reserve(std::size_t n);
    void add(std::span<const std::uint8_t> features, std::uint8_t label, PatchOrigin origin = {});

    /// Samples reordered so that sample i of the result is sample order[i] of this batch.
    PatchBatch reordered(std::span<const std::size_t> order) const;

    friend bool operator==(const PatchBatch&, const PatchBatch&) = default;

private:
    int target_;
    int side_;
    std::vector<std::uint8_t> features_;
    std::vector<std::uint8_t> labels_;
    std::vector<PatchOrigin> origins_;
};

/// Copies the side x side window centered at (row, col) of the first target-1 planes.
void extract_patch(const BitplaneStack& stack, int target, int side, int row, int col,
                   std::vector<std::uint8_t>& out);

/// Draws `count` centers uniformly with replacement over all valid positions of all stacks.
PatchBatch sample_batch(std::span<const BitplaneStack> stacks, int target, int side,
                        std::size_t count, std::uint64_t seed);

/// Decomposes every image of the requested split to full depth.
std::vector<BitplaneStack> load_stacks(const CorpusManifest& manifest, Split split);

PatchBatch sample_batch(const CorpusManifest& manifest, Split split, int target, int side,
                        std::size_t count, std::uint64_t seed);

}  // namespace planestack
