#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "planestack/raster.hpp"

namespace planestack {

inline constexpr int kMaxDepth = 8;
inline constexpr int kDefaultDepth = 8;

/// Histogram-equalized image: every pixel carries its position in the total order
/// (intensity ascending, ties by row-major index). The normalized rank u = (rank + 0.5) / N
/// lies strictly inside (0, 1), and the ranks are a permutation of 0..N-1.
class RankField {
public:
    RankField(int width, int height, std::vector<std::uint32_t> ranks);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return ranks_.size(); }

    std::uint32_t rank(std::size_t i) const { return ranks_[i]; }
    std::uint32_t rank(int row, int col) const {
        return ranks_[static_cast<std::size_t>(row) * width_ + col];
    }
    double u(std::size_t i) const { return (ranks_[i] + 0.5) / static_cast<double>(size()); }
    const std::vector<std::uint32_t>& ranks() const noexcept { return ranks_; }

    /// The lambda-th binary digit of u at pixel i, computed in exact integer arithmetic.
    std::uint8_t bit(std::size_t i, int lambda) const;

private:
    int width_;
    int height_;
    std::vector<std::uint32_t> ranks_;
};

/// Planes B_1..B_depth, all with the same dimensions. Indexing with plane(lambda) is 1-based.
class BitplaneStack {
public:
    BitplaneStack() = default;
    explicit BitplaneStack(std::vector<BinaryPlane> planes);

    int depth() const noexcept { return static_cast<int>(planes_.size()); }
    int width() const noexcept { return planes_.front().width(); }
    int height() const noexcept { return planes_.front().height(); }

    const BinaryPlane& plane(int lambda) const;
    const std::vector<BinaryPlane>& planes() const noexcept { return planes_; }

    /// First `depth` planes.
    BitplaneStack truncated(int depth) const;

    friend bool operator==(const BitplaneStack&, const BitplaneStack&) = default;

private:
    std::vector<BinaryPlane> planes_;
};

RankField equalize(const GrayImage& img);

BitplaneStack decompose(const RankField& rf, int depth = kDefaultDepth);

inline BitplaneStack decompose_image(const GrayImage& img, int depth = kDefaultDepth) {
    return decompose(equalize(img), depth);
}

/// Weighted sum of the planes, left-aligned into 8 bits when depth < 8.
GrayImage recompose(const BitplaneStack& stack);

/// 8-bit histogram-equalized rendering of an image, floor(u * 256).
GrayImage equalized_image(const GrayImage& img);

BitplaneStack crop(const BitplaneStack& stack, int border);

/// <stem>.b<lambda>.pgm
std::filesystem::path plane_path(const std::filesystem::path& stem, int lambda);
void save_stack(const std::filesystem::path& stem, const BitplaneStack& stack);
BitplaneStack load_stack(const std::filesystem::path& stem, int depth);

}  // namespace planestack
