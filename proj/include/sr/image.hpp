#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sr {

/// 8-bit RGB image or volume. Interleaved RGB, slice-major then row-major,
/// so pixel (x, y, z) lives at index z*height*width + y*width + x.
struct RgbImage {
    int width = 0;
    int height = 0;
    int depth = 1;
    std::vector<std::uint8_t> data;

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * height * depth;
    }
    const std::uint8_t* pixel(std::size_t p) const { return data.data() + 3 * p; }
};

/// Per-pixel feature image with components in [0,1]. Normalized L*a*b for
/// color input; the channel count is not fixed so 1-d gray features run
/// through the same machinery.
struct LabImage {
    int width = 0;
    int height = 0;
    int depth = 1;
    int channels = 3;
    std::vector<double> data;

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * height * depth;
    }
    std::span<const double> feature(std::size_t p) const {
        return {data.data() + static_cast<std::size_t>(channels) * p,
                static_cast<std::size_t>(channels)};
    }
};

}  // namespace sr
