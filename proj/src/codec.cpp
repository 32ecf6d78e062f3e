#include "planestack/codec.hpp"

#include <array>
#include <string>

#include "planestack/pgm.hpp"

namespace planestack {

namespace {

void check_depth(int depth) {
    if (depth < 1 || depth > kMaxDepth) {
        throw InvalidArgument("bitplane depth must be in 1..8, got " + std::to_string(depth));
    }
}

}  // namespace

RankField::RankField(int width, int height, std::vector<std::uint32_t> ranks)
    : width_(width), height_(height), ranks_(std::move(ranks)) {
    if (width < 1 || height < 1 ||
        ranks_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw InvalidArgument("rank field shape does not match rank count");
    }
    std::vector<bool> seen(ranks_.size(), false);
    for (auto r : ranks_) {
        if (r >= ranks_.size() || seen[r]) {
            throw InvalidArgument("rank field must hold a permutation of 0..N-1");
        }
        seen[r] = true;
    }
}

std::uint8_t RankField::bit(std::size_t i, int lambda) const {
    // floor(u * 2^lambda) with u = (2r + 1) / 2N.
    const std::uint64_t num = (2 * static_cast<std::uint64_t>(ranks_[i]) + 1) << lambda;
    const std::uint64_t den = 2 * static_cast<std::uint64_t>(ranks_.size());
    return static_cast<std::uint8_t>((num / den) & 1u);
}

BitplaneStack::BitplaneStack(std::vector<BinaryPlane> planes) : planes_(std::move(planes)) {
    check_depth(static_cast<int>(planes_.size()));
    for (const auto& p : planes_) {
        if (!p.same_shape(planes_.front())) {
            throw InvalidArgument("bitplanes in a stack must share dimensions");
        }
    }
}

const BinaryPlane& BitplaneStack::plane(int lambda) const {
    if (lambda < 1 || lambda > depth()) {
        throw InvalidArgument("bitplane index " + std::to_string(lambda) + " outside 1.." +
                              std::to_string(depth()));
    }
    return planes_[lambda - 1];
}

BitplaneStack BitplaneStack::truncated(int depth) const {
    check_depth(depth);
    if (depth > this->depth()) throw InvalidArgument("cannot truncate to a deeper stack");
    return BitplaneStack(std::vector<BinaryPlane>(planes_.begin(), planes_.begin() + depth));
}

RankField equalize(const GrayImage& img) {
    // Counting sort on intensity; scanning pixels in row-major order keeps ties by index.
    std::array<std::uint32_t, 257> start{};
    for (auto v : img.pixels()) ++start[v + 1];
    for (std::size_t k = 1; k < start.size(); ++k) start[k] += start[k - 1];
    std::vector<std::uint32_t> ranks(img.size());
    auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) ranks[i] = start[px[i]]++;
    return RankField(img.width(), img.height(), std::move(ranks));
}

BitplaneStack decompose(const RankField& rf, int depth) {
    check_depth(depth);
    std::vector<BinaryPlane> planes;
    planes.reserve(depth);
    for (int lambda = 1; lambda <= depth; ++lambda) {
        std::vector<std::uint8_t> bits(rf.size());
        for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = rf.bit(i, lambda);
        planes.emplace_back(rf.width(), rf.height(), std::move(bits));
    }
    return BitplaneStack(std::move(planes));
}

GrayImage recompose(const BitplaneStack& stack) {
    const int depth = stack.depth();
    std::vector<std::uint8_t> px(stack.plane(1).size(), 0);
    for (int lambda = 1; lambda <= depth; ++lambda) {
        const unsigned weight = 1u << (depth - lambda);
        auto bits = stack.plane(lambda).pixels();
        for (std::size_t i = 0; i < px.size(); ++i) px[i] += static_cast<std::uint8_t>(bits[i] * weight);
    }
    const int shift = kMaxDepth - depth;
    if (shift > 0) {
        for (auto& v : px) v = static_cast<std::uint8_t>(v << shift);
    }
    return GrayImage(stack.width(), stack.height(), std::move(px));
}

GrayImage equalized_image(const GrayImage& img) {
    const auto rf = equalize(img);
    std::vector<std::uint8_t> px(rf.size());
    const std::uint64_t den = 2 * static_cast<std::uint64_t>(rf.size());
    for (std::size_t i = 0; i < px.size(); ++i) {
        px[i] = static_cast<std::uint8_t>(((2 * static_cast<std::uint64_t>(rf.rank(i)) + 1) << 8) / den);
    }
    return GrayImage(img.width(), img.height(), std::move(px));
}

BitplaneStack crop(const BitplaneStack& stack, int border) {
    std::vector<BinaryPlane> planes;
    planes.reserve(stack.depth());
    for (const auto& p : stack.planes()) planes.push_back(crop(p, border));
    return BitplaneStack(std::move(planes));
}

std::filesystem::path plane_path(const std::filesystem::path& stem, int lambda) {
    auto p = stem;
    p += ".b" + std::to_string(lambda) + ".pgm";
    return p;
}

void save_stack(const std::filesystem::path& stem, const BitplaneStack& stack) {
    for (int lambda = 1; lambda <= stack.depth(); ++lambda) {
        save_pgm(plane_path(stem, lambda), plane_to_image(stack.plane(lambda)));
    }
}

BitplaneStack load_stack(const std::filesystem::path& stem, int depth) {
    check_depth(depth);
    std::vector<BinaryPlane> planes;
    for (int lambda = 1; lambda <= depth; ++lambda) {
        planes.push_back(image_to_plane(load_pgm(plane_path(stem, lambda))));
    }
    return BitplaneStack(std::move(planes));
}

}  // namespace planestack
