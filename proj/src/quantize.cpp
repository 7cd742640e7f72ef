#include "sr/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "sr/errors.hpp"
#include "sr/vecmath.hpp"

namespace sr {

namespace {

// Uniform double in [0,1) from the raw engine output; std::* distributions
// are implementation-defined, this keeps the stream reproducible.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

struct Sample {
    std::vector<double> data;  // m * dim
    std::size_t m = 0;
    int dim = 0;
    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * dim, static_cast<std::size_t>(dim)};
    }
};

Sample draw_sample(std::span<const double> features, int dim, std::size_t m,
                   std::mt19937_64& rng) {
    const std::size_t n = features.size() / dim;
    Sample s;
    s.dim = dim;
    if (n <= m) {
        s.m = n;
        s.data.assign(features.begin(), features.end());
        return s;
    }
    // Partial Fisher-Yates over the index set.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + uniform_index(rng, n - i);
        std::swap(idx[i], idx[j]);
    }
    s.m = m;
    s.data.resize(m * dim);
    for (std::size_t i = 0; i < m; ++i) {
        const double* src = features.data() + idx[i] * dim;
        std::copy(src, src + dim, s.data.begin() + i * dim);
    }
    return s;
}

std::size_t count_distinct(const Sample& s) {
    std::vector<std::size_t> order(s.m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto less = [&](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(
            s.data.begin() + a * s.dim, s.data.begin() + (a + 1) * s.dim,
            s.data.begin() + b * s.dim, s.data.begin() + (b + 1) * s.dim);
    };
    std::sort(order.begin(), order.end(), less);
    std::size_t distinct = s.m == 0 ? 0 : 1;
    for (std::size_t i = 1; i < s.m; ++i) {
        if (less(order[i - 1], order[i])) ++distinct;
    }
    return distinct;
}

int nearest_of(const std::vector<double>& centers, int k, int dim,
               std::span<const double> x) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
        const double d = squared_l2(
            {centers.data() + static_cast<std::size_t>(c) * dim,
             static_cast<std::size_t>(dim)},
            x);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

std::vector<double> kmeanspp_init(const Sample& s, int k, std::mt19937_64& rng) {
    const int dim = s.dim;
    std::vector<double> centers(static_cast<std::size_t>(k) * dim);
    std::vector<double> d2(s.m, std::numeric_limits<double>::infinity());

    const std::size_t first = uniform_index(rng, s.m);
    std::copy_n(s.data.begin() + first * dim, dim, centers.begin());
    for (std::size_t i = 0; i < s.m; ++i) {
        d2[i] = squared_l2(s.row(i), {centers.data(), static_cast<std::size_t>(dim)});
    }

    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t chosen = s.m - 1;
        if (total > 0.0) {
            const double r = uniform01(rng) * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < s.m; ++i) {
                acc += d2[i];
                if (acc >= r) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = uniform_index(rng, s.m);
        }
        std::copy_n(s.data.begin() + chosen * dim,
                    dim, centers.begin() + static_cast<std::size_t>(c) * dim);
        const std::span<const double> cc{
            centers.data() + static_cast<std::size_t>(c) * dim,
            static_cast<std::size_t>(dim)};
        for (std::size_t i = 0; i < s.m; ++i) {
            d2[i] = std::min(d2[i], squared_l2(s.row(i), cc));
        }
    }
    return centers;
}

struct LloydResult {
    std::vector<double> centers;
    double inertia = 0.0;
};

LloydResult lloyd(const Sample& s, std::vector<double> centers, int k,
                  int max_iter = 300) {
    const int dim = s.dim;
    std::vector<int> assign(s.m, -1);
    std::vector<int> prev_assign;
    std::vector<double> sums(static_cast<std::size_t>(k) * dim);
    std::vector<std::int64_t> counts(k);

    for (int iter = 0; iter < max_iter; ++iter) {
        prev_assign = assign;
        for (std::size_t i = 0; i < s.m; ++i) {
            assign[i] = nearest_of(centers, k, dim, s.row(i));
        }
        const bool stable = iter > 0 && assign == prev_assign;

        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), std::int64_t{0});
        for (std::size_t i = 0; i < s.m; ++i) {
            const auto row = s.row(i);
            double* dst = sums.data() + static_cast<std::size_t>(assign[i]) * dim;
            for (int d = 0; d < dim; ++d) dst[d] += row[d];
            ++counts[assign[i]];
        }

        bool repaired = false;
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                for (int d = 0; d < dim; ++d) {
                    centers[static_cast<std::size_t>(c) * dim + d] =
                        sums[static_cast<std::size_t>(c) * dim + d] / counts[c];
                }
            }
        }
        // Empty cluster: re-seed at the sample farthest from its assigned center.
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            std::size_t far_i = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < s.m; ++i) {
                const double d = squared_l2(
                    s.row(i),
                    {centers.data() + static_cast<std::size_t>(assign[i]) * dim,
                     static_cast<std::size_t>(dim)});
                if (d > far_d) {
                    far_d = d;
                    far_i = i;
                }
            }
            std::copy_n(s.data.begin() + far_i * dim, dim,
                        centers.begin() + static_cast<std::size_t>(c) * dim);
            assign[far_i] = c;  // keeps a second empty cluster from stealing it
            repaired = true;
        }

        if (stable && !repaired) break;
    }

    LloydResult res;
    res.centers = std::move(centers);
    res.inertia = 0.0;
    for (std::size_t i = 0; i < s.m; ++i) {
        const int c = nearest_of(res.centers, k, dim, s.row(i));
        res.inertia += squared_l2(
            s.row(i),
            {res.centers.data() + static_cast<std::size_t>(c) * dim,
             static_cast<std::size_t>(dim)});
    }
    return res;
}

}  // namespace

Palette fit_palette(std::span<const double> features, int dim,
                    const QuantizeConfig& cfg) {
    if (features.empty()) throw ConfigError("no features");
    if (dim < 1 || features.size() % dim != 0) {
        throw ConfigError("feature buffer size is not a multiple of the dimension");
    }
    if (cfg.k < 1) throw ConfigError("palette size k must be >= 1");
    if (cfg.restarts < 1) throw ConfigError("restarts must be >= 1");
    if (cfg.samples < static_cast<std::size_t>(cfg.k)) {
        throw ConfigError("sample count must be >= k");
    }

    std::mt19937_64 rng(cfg.seed);
    const Sample s = draw_sample(features, dim, cfg.samples, rng);
    const std::size_t distinct = count_distinct(s);
    const int k = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(cfg.k), distinct));

    Palette best;
    best.requested_k = cfg.k;
    best.k = k;
    best.dim = dim;
    best.inertia = std::numeric_limits<double>::infinity();
    best.restart_inertias.reserve(cfg.restarts);

    for (int r = 0; r < cfg.restarts; ++r) {
        LloydResult run = lloyd(s, kmeanspp_init(s, k, rng), k);
        best.restart_inertias.push_back(run.inertia);
        if (run.inertia < best.inertia) {
            best.inertia = run.inertia;
            best.centers = std::move(run.centers);
        }
    }
    return best;
}

int nearest_center(const Palette& palette, std::span<const double> x) {
    return nearest_of(palette.centers, palette.k, palette.dim, x);
}

}  // namespace sr
