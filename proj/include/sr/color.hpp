#pragma once

#include "sr/image.hpp"

namespace sr {

/// sRGB (D65) -> CIE L*a*b*, rescaled per channel to [0,1]:
/// L*/100, (a*+128)/255, (b*+128)/255, clamped to the closed interval.
LabImage rgb_to_lab_normalized(const RgbImage& img);

}  // namespace sr
