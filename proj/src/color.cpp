#include "sr/color.hpp"

#include <algorithm>
#include <cmath>

namespace sr {

namespace {

inline double srgb_to_linear(double c) {
    return c > 0.04045 ? std::pow((c + 0.055) / 1.055, 2.4) : c / 12.92;
}

// CIE f() with the standard linear toe below (6/29)^3.
inline double lab_f(double t) {
    constexpr double kEps = 216.0 / 24389.0;
    constexpr double kKappa = 24389.0 / 27.0;
    return t > kEps ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0;
}

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

LabImage rgb_to_lab_normalized(const RgbImage& img) {
    LabImage out;
    out.width = img.width;
    out.height = img.height;
    out.depth = img.depth;
    out.channels = 3;
    out.data.resize(img.pixel_count() * 3);

    // D65 reference white for the XYZ normalization.
    constexpr double xn = 0.95047, yn = 1.0, zn = 1.08883;

    const std::size_t n = img.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        const std::uint8_t* px = img.pixel(p);
        const double r = srgb_to_linear(px[0] / 255.0);
        const double g = srgb_to_linear(px[1] / 255.0);
        const double b = srgb_to_linear(px[2] / 255.0);

        const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
        const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
        const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;

        const double fx = lab_f(x / xn);
        const double fy = lab_f(y / yn);
        const double fz = lab_f(z / zn);

        const double lab_l = 116.0 * fy - 16.0;
        const double lab_a = 500.0 * (fx - fy);
        const double lab_b = 200.0 * (fy - fz);

        out.data[3 * p + 0] = clamp01(lab_l / 100.0);
        out.data[3 * p + 1] = clamp01((lab_a + 128.0) / 255.0);
        out.data[3 * p + 2] = clamp01((lab_b + 128.0) / 255.0);
    }
    return out;
}

}  // namespace sr
