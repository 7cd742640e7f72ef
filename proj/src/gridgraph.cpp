#include "sr/gridgraph.hpp"

#include <algorithm>
#include <cmath>

#include "sr/errors.hpp"
#include "sr/vecmath.hpp"

namespace sr {

namespace {

struct Offset {
    int dz, dy, dx;
};

// Forward stencil: offsets whose linear index (slice-major, row-major) is
// strictly positive, so every edge is emitted once with p < q.
std::vector<Offset> forward_offsets(int connectivity, bool volumetric) {
    std::vector<Offset> out;
    if (!volumetric) {
        if (connectivity != 4 && connectivity != 8) {
            throw ConfigError("2D connectivity must be 4 or 8");
        }
        out.push_back({0, 0, 1});
        out.push_back({0, 1, 0});
        if (connectivity == 8) {
            out.push_back({0, 1, -1});
            out.push_back({0, 1, 1});
        }
        return out;
    }
    if (connectivity != 6 && connectivity != 18 && connectivity != 26) {
        throw ConfigError("3D connectivity must be 6, 18 or 26");
    }
    const int max_nonzero = connectivity == 6 ? 1 : (connectivity == 18 ? 2 : 3);
    for (int dz = 0; dz <= 1; ++dz) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const bool forward = dz > 0 || (dz == 0 && dy > 0) ||
                                     (dz == 0 && dy == 0 && dx > 0);
                if (!forward) continue;
                const int nonzero = (dz != 0) + (dy != 0) + (dx != 0);
                if (nonzero <= max_nonzero) out.push_back({dz, dy, dx});
            }
        }
    }
    return out;
}

RegionGraph build_lattice(const LabImage& img, int connectivity, bool volumetric) {
    if (img.width <= 0 || img.height <= 0 || img.depth <= 0 || img.pixel_count() == 0) {
        throw ConfigError("empty image");
    }
    const auto offsets = forward_offsets(connectivity, volumetric);

    RegionGraph g;
    g.node_count = img.pixel_count();
    g.feature_dim = img.channels;
    g.features = img.data;
    g.sizes.assign(g.node_count, 1);

    const int w = img.width, h = img.height, d = img.depth;
    g.edges.reserve(g.node_count * offsets.size());
    for (int z = 0; z < d; ++z) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::uint32_t p = static_cast<std::uint32_t>(
                    (static_cast<std::size_t>(z) * h + y) * w + x);
                for (const Offset& o : offsets) {
                    const int nz = z + o.dz, ny = y + o.dy, nx = x + o.dx;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h || nz < 0 || nz >= d) {
                        continue;
                    }
                    const std::uint32_t q = static_cast<std::uint32_t>(
                        (static_cast<std::size_t>(nz) * h + ny) * w + nx);
                    g.edges.emplace_back(p, q);
                }
            }
        }
    }
    g.weights.assign(g.edges.size(), 1.0);
    return g;
}

}  // namespace

RegionGraph lattice_2d(const LabImage& img, int connectivity) {
    return build_lattice(img, connectivity, false);
}

RegionGraph lattice_3d(const LabImage& vol, int connectivity) {
    return build_lattice(vol, connectivity, true);
}

RegionGraph lattice(const LabImage& img, int connectivity) {
    if (img.depth > 1) {
        return lattice_3d(img, connectivity == 0 ? 6 : connectivity);
    }
    return lattice_2d(img, connectivity == 0 ? 4 : connectivity);
}

void compute_weights(RegionGraph& g, double gamma) {
    if (gamma < 0.0) throw ConfigError("gamma must be non-negative");
    g.weights.resize(g.edges.size());
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const auto [p, q] = g.edges[e];
        g.weights[e] = std::exp(-gamma * squared_l2(g.feature(p), g.feature(q)));
    }
}

double auto_gamma(const RegionGraph& g) {
    if (g.edges.empty()) throw ConfigError("graph has no edges");
    double sum = 0.0;
    for (const auto& [p, q] : g.edges) {
        sum += squared_l2(g.feature(p), g.feature(q));
    }
    const double mean = sum / static_cast<double>(g.edges.size());
    return mean > 0.0 ? 1.0 / (2.0 * mean) : 0.0;
}

AdjacencyIndex::AdjacencyIndex(
    std::size_t node_count,
    std::span<const std::pair<std::uint32_t, std::uint32_t>> edges) {
    offsets_.assign(node_count + 1, 0);
    for (const auto& [p, q] : edges) {
        ++offsets_[p + 1];
        ++offsets_[q + 1];
    }
    for (std::size_t i = 1; i <= node_count; ++i) offsets_[i] += offsets_[i - 1];
    list_.resize(edges.size() * 2);
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (const auto& [p, q] : edges) {
        list_[cursor[p]++] = q;
        list_[cursor[q]++] = p;
    }
    for (std::size_t i = 0; i < node_count; ++i) {
        std::sort(list_.begin() + offsets_[i], list_.begin() + offsets_[i + 1]);
    }
}

}  // namespace sr
