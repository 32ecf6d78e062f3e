#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "planestack/errors.hpp"

namespace planestack {

/// Dense row-major 2-D grid. Width and height are at least 1.
template <typename T>
class Raster {
public:
    using value_type = T;

    Raster() = default;

    Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
        check_dims(width, height);
        data_.assign(static_cast<std::size_t>(width) * height, fill);
    }

    Raster(int width, int height, std::vector<T> data)
        : width_(width), height_(height), data_(std::move(data)) {
        check_dims(width, height);
        if (data_.size() != static_cast<std::size_t>(width) * height) {
            throw InvalidArgument("raster data length " + std::to_string(data_.size()) +
                                  " does not match " + std::to_string(width) + "x" +
                                  std::to_string(height));
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(int row, int col) { return data_[index(row, col)]; }
    const T& operator()(int row, int col) const { return data_[index(row, col)]; }

    std::span<T> pixels() noexcept { return data_; }
    std::span<const T> pixels() const noexcept { return data_; }
    std::span<const T> row(int r) const noexcept {
        return std::span<const T>(data_).subspan(static_cast<std::size_t>(r) * width_, width_);
    }

    bool same_shape(const Raster& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    static void check_dims(int width, int height) {
        if (width < 1 || height < 1) {
            throw InvalidArgument("raster dimensions must be positive, got " +
                                  std::to_string(width) + "x" + std::to_string(height));
        }
    }
    std::size_t index(int row, int col) const noexcept {
        return static_cast<std::size_t>(row) * width_ + col;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

/// 8-bit grayscale intensities.
class GrayImage : public Raster<std::uint8_t> {
public:
    using Raster::Raster;
};

/// A single bitplane; every stored value is 0 or 1.
class BinaryPlane : public Raster<std::uint8_t> {
public:
    BinaryPlane() = default;
    BinaryPlane(int width, int height, std::uint8_t fill = 0) : Raster(width, height, fill) {
        validate();
    }
    BinaryPlane(int width, int height, std::vector<std::uint8_t> bits)
        : Raster(width, height, std::move(bits)) {
        validate();
    }

    double density() const noexcept {
        std::size_t ones = 0;
        for (auto b : pixels()) ones += b;
        return static_cast<double>(ones) / static_cast<double>(size());
    }

private:
    void validate() const {
        for (auto b : pixels()) {
            if (b > 1) throw InvalidArgument("binary plane values must be 0 or 1");
        }
    }
};

/// Real-valued plane, used for activation maps.
using RealPlane = Raster<double>;

/// Central region of a raster with `border` pixels removed from every side.
template <typename R>
R crop(const R& src, int border) {
    if (border < 0 || 2 * border >= src.width() || 2 * border >= src.height()) {
        throw InvalidArgument("crop border " + std::to_string(border) + " too large for " +
                              std::to_string(src.width()) + "x" + std::to_string(src.height()));
    }
    if (border == 0) return src;
    const int w = src.width() - 2 * border;
    const int h = src.height() - 2 * border;
    std::vector<typename R::value_type> out;
    out.reserve(static_cast<std::size_t>(w) * h);
    for (int r = 0; r < h; ++r) {
        auto row = src.row(r + border).subspan(border, w);
        out.insert(out.end(), row.begin(), row.end());
    }
    return R(w, h, std::move(out));
}

}  // namespace planestack
