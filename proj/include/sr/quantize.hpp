#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sr {

struct QuantizeConfig {
    int k = 16;
    std::size_t samples = 10000;  // M, drawn without replacement
    int restarts = 10;            // k-means++ initializations; best inertia wins
    std::uint64_t seed = 0;
};

/// The K quantized feature vectors (cluster centers). Labels index into this.
struct Palette {
    int k = 0;
    int dim = 0;
    int requested_k = 0;  // before any reduction to the distinct-sample count
    std::vector<double> centers;  // k * dim, one row per center
    double inertia = 0.0;         // sum of squared sample distances to nearest center
    std::vector<double> restart_inertias;  // per restart, diagnostics

    std::span<const double> center(int i) const {
        return {centers.data() + static_cast<std::size_t>(i) * dim,
                static_cast<std::size_t>(dim)};
    }
};

/// Sampled k-means: draws min(M, n) features without replacement once, runs
/// `restarts` k-means++-seeded Lloyd passes over that shared sample and keeps
/// the run with minimal inertia. K is reduced to the distinct sample count
/// when fewer than K distinct features exist.
Palette fit_palette(std::span<const double> features, int dim, const QuantizeConfig& cfg);

/// argmin_k ||x - theta_k||^2 with ties broken by the lowest index.
int nearest_center(const Palette& palette, std::span<const double> x);

}  // namespace sr
