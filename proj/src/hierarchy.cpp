#include "sr/hierarchy.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "sr/color.hpp"
#include "sr/errors.hpp"
#include "sr/gridgraph.hpp"
#include "sr/mrf.hpp"
#include "sr/quantize.hpp"

namespace sr {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Shared per-level core: quantize features, weight edges, minimize, enforce
// the size window. The returned Rag's pixel_map is indexed by g's nodes.
Rag run_graph_level(const RegionGraph& g, const LevelConfig& cfg, LevelStats* stats) {
    const auto t0 = Clock::now();

    QuantizeConfig qc;
    qc.k = cfg.k;
    qc.samples = std::max<std::size_t>(cfg.samples, static_cast<std::size_t>(cfg.k));
    qc.restarts = cfg.restarts;
    qc.seed = cfg.seed;
    const Palette palette = fit_palette(g.features, g.feature_dim, qc);

    RegionGraph weighted = g;
    const double gamma =
        cfg.gamma ? *cfg.gamma : (g.edges.empty() ? 0.0 : auto_gamma(g));
    compute_weights(weighted, gamma);

    const EnergyModel model(weighted, palette, cfg.lambda, cfg.size_weighted_unary);
    Labeling init = model.nearest_center_labeling();
    const double energy_init = model.total_energy(init);
    Labeling labels = minimize(model, std::move(init), {cfg.max_cycles});
    const double energy_final = model.total_energy(labels);

    std::int64_t total = 0;
    for (const std::int64_t s : g.sizes) total += s;
    SizeBounds bounds = SizeBounds::unconstrained();
    if (cfg.bounds) {
        bounds = *cfg.bounds;
    } else if (cfg.n_target) {
        bounds = SizeBounds::from_target(*cfg.n_target, total);
    }

    Rag rag = enforce_count(weighted, labels, bounds, palette);
    // The k <= previous-k chain constraint compares configured sizes, so a
    // degenerate reduction (fewer distinct colors than k) must not tighten it.
    rag.palette_size = palette.requested_k;

    if (stats) {
        stats->k_used = palette.k;
        stats->gamma_used = gamma;
        stats->energy_init = energy_init;
        stats->energy_final = energy_final;
        stats->region_count = static_cast<std::int64_t>(rag.regions.size());
        stats->wall_ms = ms_since(t0);
    }
    return rag;
}

RegionGraph graph_from_rag(const Rag& rag) {
    RegionGraph g;
    g.node_count = rag.regions.size();
    g.feature_dim = rag.feature_dim;
    g.features.resize(g.node_count * rag.feature_dim);
    g.sizes.resize(g.node_count);
    for (std::size_t i = 0; i < g.node_count; ++i) {
        const Region& r = rag.regions[i];
        std::copy(r.mean.begin(), r.mean.end(),
                  g.features.begin() + i * rag.feature_dim);
        g.sizes[i] = r.size;
    }
    g.edges.reserve(rag.adjacency.size());
    for (const auto& [p, q] : rag.adjacency) {
        g.edges.emplace_back(static_cast<std::uint32_t>(p),
                             static_cast<std::uint32_t>(q));
    }
    g.weights.assign(g.edges.size(), 1.0);
    return g;
}

}  // namespace

Rag run_level(const Rag& prev, const LevelConfig& cfg, LevelStats* stats) {
    if (prev.regions.empty()) throw ConfigError("previous level has no regions");
    if (prev.palette_size > 0 && cfg.k > prev.palette_size) {
        throw ConfigError("level palette size must not exceed the previous level's");
    }

    Rag rag = run_graph_level(graph_from_rag(prev), cfg, stats);

    // Compose down to base pixels.
    Rag out = std::move(rag);
    std::vector<std::int32_t> node_map = std::move(out.pixel_map);
    out.pixel_map.resize(prev.pixel_map.size());
    for (std::size_t i = 0; i < prev.pixel_map.size(); ++i) {
        out.pixel_map[i] = node_map[prev.pixel_map[i]];
    }
    out.width = prev.width;
    out.height = prev.height;
    out.depth = prev.depth;
    return out;
}

HierarchyResult run_hierarchy(const LabImage& img, std::span<const LevelConfig> configs,
                              int connectivity) {
    if (configs.empty()) throw ConfigError("at least one level config is required");

    HierarchyResult result;
    result.configs.assign(configs.begin(), configs.end());
    result.stats.resize(configs.size());

    const RegionGraph g = lattice(img, connectivity);
    Rag level = run_graph_level(g, configs[0], &result.stats[0]);
    level.width = img.width;
    level.height = img.height;
    level.depth = img.depth;
    result.levels.push_back(std::move(level));

    for (std::size_t i = 1; i < configs.size(); ++i) {
        Rag next = run_level(result.levels.back(), configs[i], &result.stats[i]);
        if (!refines(next, result.levels.back())) {
            throw std::logic_error("hierarchy refinement invariant violated");
        }
        result.levels.push_back(std::move(next));
    }
    return result;
}

Rag ingest_label_map(std::span<const std::int32_t> labels, const LabImage& img,
                     int connectivity) {
    if (labels.size() != img.pixel_count()) {
        throw ConfigError("label map dimensions do not match the image");
    }

    // Dense re-index (sorted id order), so foreign id spaces are harmless.
    std::vector<std::int32_t> dense(labels.size());
    {
        std::vector<std::int32_t> remap;
        std::vector<std::int32_t> sorted_ids(labels.begin(), labels.end());
        std::sort(sorted_ids.begin(), sorted_ids.end());
        sorted_ids.erase(std::unique(sorted_ids.begin(), sorted_ids.end()),
                         sorted_ids.end());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const auto it = std::lower_bound(sorted_ids.begin(), sorted_ids.end(),
                                             labels[i]);
            dense[i] = static_cast<std::int32_t>(it - sorted_ids.begin());
        }
    }

    // Connected components split disconnected ids; means/sizes/adjacency come
    // out of the same pass.
    const RegionGraph g = lattice(img, connectivity);
    Labeling as_labels(dense.begin(), dense.end());
    Rag rag = connected_components(g, as_labels);
    rag.width = img.width;
    rag.height = img.height;
    rag.depth = img.depth;
    rag.palette_size = 0;  // unknown; the next level quantizes freely
    for (Region& r : rag.regions) r.label = -1;
    return rag;
}

bool refines(const Rag& coarse, const Rag& fine) {
    if (coarse.pixel_map.size() != fine.pixel_map.size()) return false;
    std::vector<std::int32_t> assigned(fine.regions.size(), -1);
    for (std::size_t px = 0; px < fine.pixel_map.size(); ++px) {
        const std::int32_t f = fine.pixel_map[px];
        const std::int32_t c = coarse.pixel_map[px];
        if (assigned[f] < 0) {
            assigned[f] = c;
        } else if (assigned[f] != c) {
            return false;
        }
    }
    return true;
}

}  // namespace sr
