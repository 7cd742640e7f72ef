#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sr/image.hpp"
#include "sr/regions.hpp"

namespace sr {

struct LabelMap {
    int width = 0, height = 0, depth = 1;
    std::vector<std::int32_t> ids;
};

/// Decodes PNG (any color type, result is 8-bit RGB; gray is replicated) or
/// binary PPM (P6). A directory is read as a volume of slices in filename
/// order.
RgbImage read_image(const std::filesystem::path& path);

/// 8-bit RGB PNG (2D only).
void write_image(const RgbImage& img, const std::filesystem::path& path);

/// Region ids re-indexed densely, then written as 16-bit grayscale PNG, or
/// CSV (one row of comma-separated ids per image row) when the path ends in
/// .csv. More than 65535 regions requires CSV. Volumes are written as a
/// directory of per-slice PNGs.
void write_label_map(std::span<const std::int32_t> ids, int width, int height,
                     int depth, const std::filesystem::path& path);
void write_label_map(const Rag& rag, const std::filesystem::path& path);

/// Reads 8/16-bit grayscale PNG, CSV, or a directory of slices.
LabelMap read_label_map(const std::filesystem::path& path);

/// Writes the image with region boundary pixels drawn in red, or a pure
/// black/white boundary map when boundary_only is set. 2D only.
void write_overlay(const RgbImage& img, std::span<const std::int32_t> ids,
                   const std::filesystem::path& path, bool boundary_only = false);

}  // namespace sr
