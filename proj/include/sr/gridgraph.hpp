#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sr/image.hpp"

namespace sr {

/// Graph the labeling energy is defined over. Nodes are pixels at the base
/// level and regions above it. Edges are stored once with p < q; weights
/// default to 1 until compute_weights runs.
struct RegionGraph {
    std::size_t node_count = 0;
    int feature_dim = 0;
    std::vector<double> features;     // node_count * feature_dim
    std::vector<std::int64_t> sizes;  // base pixels represented by each node
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::vector<double> weights;      // per edge, in (0,1]

    std::span<const double> feature(std::size_t p) const {
        return {features.data() + p * feature_dim,
                static_cast<std::size_t>(feature_dim)};
    }
};

/// One node per pixel in row-major order, unit sizes, edges between lattice
/// neighbors. connectivity: 4 or 8.
RegionGraph lattice_2d(const LabImage& img, int connectivity = 4);

/// 3D lattice, slice-major then row-major node order. connectivity: 6, 18 or 26.
RegionGraph lattice_3d(const LabImage& vol, int connectivity = 6);

/// Dispatches on depth; connectivity 0 picks the smallest stencil (4 or 6).
RegionGraph lattice(const LabImage& img, int connectivity = 0);

/// w_pq = exp(-gamma * ||x_p - x_q||^2_2) for every edge.
void compute_weights(RegionGraph& g, double gamma);

/// Contrast-adaptive default: 1 / (2 * mean squared feature gap over edges),
/// or 0 when the mean gap is 0.
double auto_gamma(const RegionGraph& g);

/// CSR neighbor index with neighbors sorted ascending, for deterministic BFS.
class AdjacencyIndex {
public:
    AdjacencyIndex(std::size_t node_count,
                   std::span<const std::pair<std::uint32_t, std::uint32_t>> edges);
    explicit AdjacencyIndex(const RegionGraph& g)
        : AdjacencyIndex(g.node_count, g.edges) {}

    std::span<const std::uint32_t> neighbors(std::uint32_t p) const {
        return {list_.data() + offsets_[p], offsets_[p + 1] - offsets_[p]};
    }

private:
    std::vector<std::size_t> offsets_;
    std::vector<std::uint32_t> list_;
};

}  // namespace sr
