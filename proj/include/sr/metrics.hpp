#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sr {

/// Benchmark scores for one segmentation. asa == 1 - cue by construction
/// (both come from the same max-overlap assignment).
struct MetricReport {
    double br = 0.0;
    double cue = 0.0;
    double asa = 0.0;
    std::int64_t region_count = 0;
    std::vector<double> per_gt_br, per_gt_cue, per_gt_asa;
};

/// Fraction of ground-truth boundary pixels within Chebyshev distance `tol`
/// of a segmentation boundary pixel. Boundary pixels are those with a
/// 4-neighbor of different id; image borders alone are not boundaries.
/// Returns 1 when the ground truth has no boundary pixels.
double boundary_recall(std::span<const std::int32_t> seg,
                       std::span<const std::int32_t> gt, int width, int height,
                       int tol = 2);

/// Corrected under-segmentation error: per region, the pixels outside its
/// best-overlapping ground-truth segment, summed and normalized by the image
/// size.
double cue(std::span<const std::int32_t> seg, std::span<const std::int32_t> gt,
           int width, int height);

/// Achievable segmentation accuracy: per region, the pixels inside its
/// best-overlapping ground-truth segment, summed and normalized.
double asa(std::span<const std::int32_t> seg, std::span<const std::int32_t> gt,
           int width, int height);

/// All three metrics against one or more annotations; reported values are the
/// arithmetic means, per-annotation values ride along.
MetricReport evaluate(std::span<const std::int32_t> seg,
                      const std::vector<std::vector<std::int32_t>>& gts, int width,
                      int height, int tol = 2);

}  // namespace sr
