#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "sr/gridgraph.hpp"
#include "sr/mrf.hpp"
#include "sr/quantize.hpp"

namespace sr {

/// Size window [s_min, s_max] for super-regions, usually derived from a
/// target count N as s = S/N, s_min = s/5, s_max = 2s.
struct SizeBounds {
    double s_min = 0.0;
    double s_max = std::numeric_limits<double>::infinity();
    std::optional<std::int64_t> n_target;

    static SizeBounds unconstrained() { return {}; }
    static SizeBounds from_target(std::int64_t n, std::int64_t total_size);
};

struct Region {
    std::int32_t id = 0;
    int label = -1;                // palette index shared by member nodes
    std::int64_t size = 0;         // base pixels
    std::int64_t node_count = 0;   // members at the level the region was built on
    std::vector<double> mean;      // size-weighted mean feature of the members
};

/// Region adjacency graph plus the node -> region partition map. pixel_map is
/// indexed by the nodes of the graph the Rag was built over; at the pixel
/// level those nodes are the image pixels.
struct Rag {
    int width = 0, height = 0, depth = 1;  // base lattice dims (0 = graph-only)
    int feature_dim = 0;
    int palette_size = 0;  // K of the labeling that produced it (0 = unknown)
    std::vector<std::int32_t> pixel_map;
    std::vector<Region> regions;
    std::vector<std::pair<std::int32_t, std::int32_t>> adjacency;  // p < q, sorted

    std::int64_t total_size() const;
};

/// Connected components of the same-label subgraph with a maximum size cap:
/// FIFO breadth-first flood, seeds in ascending node index, neighbors visited
/// in ascending index; a component is closed once its size reaches
/// floor(s_max) and flooding restarts from the next unassigned seed.
Rag split_components(const RegionGraph& g, const Labeling& l, double s_max);

/// split_components without the size cap.
Rag connected_components(const RegionGraph& g, const Labeling& l);

/// Merges every region smaller than s_min into a neighbor: edges are visited
/// in ascending pairwise label distance ||theta_fp - theta_fq||_1 (ties by
/// edge ids) and merged while either endpoint is small. The larger region
/// survives (ties: lower id), keeps its label and absorbs sizes, means and
/// adjacency of the other.
Rag merge_small(Rag rag, const Palette& palette, double s_min);

/// split_components with bounds.s_max, then merge_small with bounds.s_min.
/// With s_max = S and s_min = 0 this is exactly connected_components.
Rag enforce_count(const RegionGraph& g, const Labeling& l, const SizeBounds& bounds,
                  const Palette& palette);

}  // namespace sr
