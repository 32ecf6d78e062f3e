#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "planestack/raster.hpp"

namespace planestack {

/// Parses a binary (P5) or ASCII (P2) PGM with maxval <= 255. Header comments are skipped.
/// Throws PgmError whose kind() tells malformed header, unsupported maxval and truncated
/// payload apart.
GrayImage read_pgm(std::span<const std::uint8_t> bytes);

/// Serializes as P5 with maxval 255.
std::vector<std::uint8_t> write_pgm(const GrayImage& img);

/// 1 -> 255, 0 -> 0.
GrayImage plane_to_image(const BinaryPlane& plane);

/// 255 -> 1, 0 -> 0; any other intensity is rejected.
BinaryPlane image_to_plane(const GrayImage& img);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

GrayImage load_pgm(const std::filesystem::path& path);
void save_pgm(const std::filesystem::path& path, const GrayImage& img);

}  // namespace planestack
