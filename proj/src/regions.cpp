#include "sr/regions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>

#include "sr/errors.hpp"
#include "sr/vecmath.hpp"

namespace sr {

SizeBounds SizeBounds::from_target(std::int64_t n, std::int64_t total_size) {
    if (n < 1) throw ConfigError("target region count must be >= 1");
    if (total_size < 1) throw ConfigError("total size must be >= 1");
    const double s = static_cast<double>(total_size) / static_cast<double>(n);
    SizeBounds b;
    b.s_min = s / 5.0;
    b.s_max = 2.0 * s;
    b.n_target = n;
    return b;
}

std::int64_t Rag::total_size() const {
    std::int64_t t = 0;
    for (const Region& r : regions) t += r.size;
    return t;
}

Rag split_components(const RegionGraph& g, const Labeling& l, double s_max) {
    if (l.size() != g.node_count) {
        throw ConfigError("labeling size does not match the graph");
    }
    const AdjacencyIndex adj(g);
    const double close_at =
        std::isfinite(s_max) ? std::max(std::floor(s_max), 1.0)
                             : std::numeric_limits<double>::infinity();

    Rag rag;
    rag.feature_dim = g.feature_dim;
    rag.pixel_map.assign(g.node_count, -1);

    std::vector<bool> queued(g.node_count, false);
    std::vector<std::uint32_t> fifo;
    fifo.reserve(g.node_count);

    for (std::uint32_t seed = 0; seed < g.node_count; ++seed) {
        if (rag.pixel_map[seed] >= 0 || queued[seed]) continue;
        const std::int32_t id = static_cast<std::int32_t>(rag.regions.size());
        const int label = l[seed];

        Region region;
        region.id = id;
        region.label = label;
        region.mean.assign(g.feature_dim, 0.0);

        fifo.clear();
        std::size_t head = 0;
        fifo.push_back(seed);
        queued[seed] = true;

        while (head < fifo.size()) {
            const std::uint32_t v = fifo[head++];
            rag.pixel_map[v] = id;
            region.size += g.sizes[v];
            region.node_count += 1;
            const auto x = g.feature(v);
            for (int d = 0; d < g.feature_dim; ++d) {
                region.mean[d] += static_cast<double>(g.sizes[v]) * x[d];
            }
            if (static_cast<double>(region.size) >= close_at) break;
            for (std::uint32_t u : adj.neighbors(v)) {
                if (!queued[u] && rag.pixel_map[u] < 0 && l[u] == label) {
                    queued[u] = true;
                    fifo.push_back(u);
                }
            }
        }
        // Nodes still waiting when the component closed go back to the pool.
        for (std::size_t i = head; i < fifo.size(); ++i) queued[fifo[i]] = false;

        if (region.size > 0) {
            for (int d = 0; d < g.feature_dim; ++d) {
                region.mean[d] /= static_cast<double>(region.size);
            }
        }
        rag.regions.push_back(std::move(region));
    }

    std::set<std::pair<std::int32_t, std::int32_t>> edges;
    for (const auto& [p, q] : g.edges) {
        const std::int32_t rp = rag.pixel_map[p];
        const std::int32_t rq = rag.pixel_map[q];
        if (rp != rq) edges.emplace(std::min(rp, rq), std::max(rp, rq));
    }
    rag.adjacency.assign(edges.begin(), edges.end());
    return rag;
}

Rag connected_components(const RegionGraph& g, const Labeling& l) {
    return split_components(g, l, std::numeric_limits<double>::infinity());
}

namespace {

struct MergeEntry {
    double cost;
    std::int32_t p, q;  // p < q
    bool operator>(const MergeEntry& o) const {
        return std::tie(cost, p, q) > std::tie(o.cost, o.p, o.q);
    }
};

std::int32_t find_root(std::vector<std::int32_t>& parent, std::int32_t v) {
    while (parent[v] != v) {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    return v;
}

}  // namespace

Rag merge_small(Rag rag, const Palette& palette, double s_min) {
    const std::size_t n = rag.regions.size();
    const auto label_cost = [&](std::int32_t a, std::int32_t b) {
        const int fa = rag.regions[a].label;
        const int fb = rag.regions[b].label;
        if (fa < 0 || fb < 0) {
            // No quantized labels (e.g. ingested maps): fall back to the mean
            // feature distance so merging still prefers similar regions.
            return l1_distance({rag.regions[a].mean.data(), rag.regions[a].mean.size()},
                               {rag.regions[b].mean.data(), rag.regions[b].mean.size()});
        }
        return l1_distance(palette.center(fa), palette.center(fb));
    };

    std::vector<std::set<std::int32_t>> nbrs(n);
    std::priority_queue<MergeEntry, std::vector<MergeEntry>, std::greater<MergeEntry>>
        queue;
    for (const auto& [p, q] : rag.adjacency) {
        nbrs[p].insert(q);
        nbrs[q].insert(p);
        queue.push({label_cost(p, q), p, q});
    }

    std::vector<std::int32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<bool> alive(n, true);

    while (!queue.empty()) {
        const MergeEntry e = queue.top();
        queue.pop();
        if (!alive[e.p] || !alive[e.q]) continue;           // stale endpoints
        if (nbrs[e.p].find(e.q) == nbrs[e.p].end()) continue;  // stale edge

        Region& rp = rag.regions[e.p];
        Region& rq = rag.regions[e.q];
        const bool p_small = static_cast<double>(rp.size) < s_min;
        const bool q_small = static_cast<double>(rq.size) < s_min;
        if (!p_small && !q_small) continue;  // sizes only grow; never eligible again

        // The larger region survives; ties go to the lower id.
        std::int32_t survivor = e.p, absorbed = e.q;
        if (rq.size > rp.size) {
            survivor = e.q;
            absorbed = e.p;
        }
        Region& rs = rag.regions[survivor];
        Region& ra = rag.regions[absorbed];

        const double total = static_cast<double>(rs.size + ra.size);
        for (int d = 0; d < rag.feature_dim; ++d) {
            rs.mean[d] = (static_cast<double>(rs.size) * rs.mean[d] +
                          static_cast<double>(ra.size) * ra.mean[d]) /
                         total;
        }
        rs.size += ra.size;
        rs.node_count += ra.node_count;
        alive[absorbed] = false;
        parent[absorbed] = survivor;

        nbrs[survivor].erase(absorbed);
        for (const std::int32_t w : nbrs[absorbed]) {
            nbrs[w].erase(absorbed);
            if (w == survivor) continue;
            if (nbrs[survivor].insert(w).second) {
                nbrs[w].insert(survivor);
                queue.push({label_cost(survivor, w), std::min(survivor, w),
                            std::max(survivor, w)});
            }
        }
        nbrs[absorbed].clear();
    }

    // Compact ids (ascending old id among survivors) and rewrite the maps.
    std::vector<std::int32_t> dense(n, -1);
    Rag out;
    out.width = rag.width;
    out.height = rag.height;
    out.depth = rag.depth;
    out.feature_dim = rag.feature_dim;
    out.palette_size = rag.palette_size;
    for (std::size_t i = 0; i < n; ++i) {
        if (!alive[i]) continue;
        dense[i] = static_cast<std::int32_t>(out.regions.size());
        Region r = std::move(rag.regions[i]);
        r.id = dense[i];
        out.regions.push_back(std::move(r));
    }
    out.pixel_map.resize(rag.pixel_map.size());
    for (std::size_t i = 0; i < rag.pixel_map.size(); ++i) {
        out.pixel_map[i] = dense[find_root(parent, rag.pixel_map[i])];
    }
    std::set<std::pair<std::int32_t, std::int32_t>> edges;
    for (std::size_t i = 0; i < n; ++i) {
        if (!alive[i]) continue;
        for (const std::int32_t w : nbrs[i]) {
            edges.emplace(std::min(dense[i], dense[w]), std::max(dense[i], dense[w]));
        }
    }
    out.adjacency.assign(edges.begin(), edges.end());
    return out;
}

Rag enforce_count(const RegionGraph& g, const Labeling& l, const SizeBounds& bounds,
                  const Palette& palette) {
    Rag rag = split_components(g, l, bounds.s_max);
    return merge_small(std::move(rag), palette, bounds.s_min);
}

}  // namespace sr
