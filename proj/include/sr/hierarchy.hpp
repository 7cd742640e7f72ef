#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sr/image.hpp"
#include "sr/regions.hpp"

namespace sr {

/// Per-level knobs. Every level re-quantizes its input features (pixel
/// features at level 1, region mean colors above) and runs the full
/// quantize -> weight -> minimize -> split & merge pass.
struct LevelConfig {
    int k = 16;
    double lambda = 0.1;
    std::optional<double> gamma;           // nullopt: contrast-adaptive default
    std::optional<std::int64_t> n_target;  // derives bounds s = S/N, [s/5, 2s]
    std::optional<SizeBounds> bounds;      // explicit bounds win over n_target
    std::size_t samples = 10000;
    int restarts = 10;
    std::uint64_t seed = 0;
    bool size_weighted_unary = true;
    int max_cycles = 5;
};

struct LevelStats {
    int k_used = 0;
    double gamma_used = 0.0;
    double energy_init = 0.0;
    double energy_final = 0.0;
    std::int64_t region_count = 0;
    double wall_ms = 0.0;
};

struct HierarchyResult {
    std::vector<Rag> levels;           // 1..n, pixel_map over base pixels
    std::vector<LevelConfig> configs;  // provenance
    std::vector<LevelStats> stats;
};

/// One hierarchy step: nodes are prev's regions, features their mean colors,
/// edges the region adjacency. The returned Rag's pixel_map is composed
/// through prev.pixel_map, so it stays indexed by base pixels.
/// Requires cfg.k <= prev.palette_size when the latter is known.
Rag run_level(const Rag& prev, const LevelConfig& cfg, LevelStats* stats = nullptr);

/// Runs the pixel-level pipeline for configs[0] on the image lattice
/// (connectivity 0 picks 4 in 2D / 6 in 3D), then one run_level per further
/// config. Checks the refinement invariant between consecutive levels.
HierarchyResult run_hierarchy(const LabImage& img, std::span<const LevelConfig> configs,
                              int connectivity = 0);

/// Builds a level-1 style Rag from a foreign label map: ids are re-indexed
/// densely, ids whose pixels are not connected are split into components,
/// sizes / mean features / lattice adjacency are computed from the image.
/// Region labels are left unset; the next run_level quantizes them.
Rag ingest_label_map(std::span<const std::int32_t> labels, const LabImage& img,
                     int connectivity = 0);

/// True iff every pair of base pixels in the same `fine` region is also in
/// the same `coarse` region.
bool refines(const Rag& coarse, const Rag& fine);

}  // namespace sr
