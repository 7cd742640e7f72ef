#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "sr/errors.hpp"
#include "sr/gridgraph.hpp"
#include "test_util.hpp"

namespace {

sr::LabImage blank(int w, int h, int d = 1, int channels = 3) {
    sr::LabImage img;
    img.width = w;
    img.height = h;
    img.depth = d;
    img.channels = channels;
    img.data.assign(static_cast<std::size_t>(w) * h * d * channels, 0.0);
    return img;
}

// Coordinate-level adjacency oracle: nodes are neighbors when all offsets are
// within 1 and the number of non-zero offsets is allowed by the connectivity.
std::set<std::pair<std::uint32_t, std::uint32_t>> expected_edges(int w, int h, int d,
                                                                 int connectivity) {
    int max_nonzero = 0;
    switch (connectivity) {
        case 4:
        case 6: max_nonzero = 1; break;
        case 18: max_nonzero = 2; break;
        case 8:
        case 26: max_nonzero = 3; break;
        default: REQUIRE(false);
    }
    std::set<std::pair<std::uint32_t, std::uint32_t>> out;
    const auto idx = [&](int x, int y, int z) {
        return static_cast<std::uint32_t>((static_cast<std::size_t>(z) * h + y) * w + x);
    };
    for (int z = 0; z < d; ++z) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                for (int dz = -1; dz <= 1; ++dz) {
                    for (int dy = -1; dy <= 1; ++dy) {
                        for (int dx = -1; dx <= 1; ++dx) {
                            const int nz = z + dz, ny = y + dy, nx = x + dx;
                            if (nx < 0 || ny < 0 || nz < 0 || nx >= w || ny >= h ||
                                nz >= d) {
                                continue;
                            }
                            const int nonzero = (dx != 0) + (dy != 0) + (dz != 0);
                            if (nonzero < 1 || nonzero > max_nonzero) continue;
                            const std::uint32_t p = idx(x, y, z);
                            const std::uint32_t q = idx(nx, ny, nz);
                            if (p < q) out.emplace(p, q);
                        }
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace

TEST_CASE("2D lattice edge counts") {
    CHECK(sr::lattice_2d(blank(2, 2), 4).edges.size() == 4);
    CHECK(sr::lattice_2d(blank(2, 2), 8).edges.size() == 6);
    CHECK(sr::lattice_2d(blank(3, 3), 4).edges.size() == 12);

    // Closed forms on a few shapes.
    for (const auto& [w, h] : {std::pair{5, 3}, {1, 7}, {4, 4}, {9, 2}}) {
        const auto g4 = sr::lattice_2d(blank(w, h), 4);
        CHECK(g4.edges.size() ==
              static_cast<std::size_t>(h * (w - 1) + w * (h - 1)));
        const auto g8 = sr::lattice_2d(blank(w, h), 8);
        CHECK(g8.edges.size() ==
              static_cast<std::size_t>(h * (w - 1) + w * (h - 1) +
                                       2 * (w - 1) * (h - 1)));
        CHECK(g4.node_count == static_cast<std::size_t>(w) * h);
        for (const std::int64_t s : g4.sizes) CHECK(s == 1);
    }
}

TEST_CASE("3D lattice edge counts") {
    CHECK(sr::lattice_3d(blank(2, 2, 2), 6).edges.size() == 12);
    CHECK(sr::lattice_3d(blank(2, 2, 2), 26).edges.size() == 28);  // complete K8

    const auto g18 = sr::lattice_3d(blank(2, 2, 2), 18);
    CHECK(g18.edges.size() == expected_edges(2, 2, 2, 18).size());
}

TEST_CASE("lattice edges match the coordinate oracle") {
    for (const int conn : {4, 8}) {
        const auto g = sr::lattice_2d(blank(5, 4), conn);
        const auto want = expected_edges(5, 4, 1, conn);
        std::set<std::pair<std::uint32_t, std::uint32_t>> got(g.edges.begin(),
                                                              g.edges.end());
        CHECK(got == want);
        CHECK(g.edges.size() == want.size());  // no duplicates
    }
    for (const int conn : {6, 18, 26}) {
        const auto g = sr::lattice_3d(blank(4, 3, 3), conn);
        const auto want = expected_edges(4, 3, 3, conn);
        std::set<std::pair<std::uint32_t, std::uint32_t>> got(g.edges.begin(),
                                                              g.edges.end());
        CHECK(got == want);
        CHECK(g.edges.size() == want.size());
    }
}

TEST_CASE("depth-1 volume with 6-connectivity equals the 4-connected lattice") {
    const auto g2 = sr::lattice_2d(blank(6, 5), 4);
    const auto g3 = sr::lattice_3d(blank(6, 5, 1), 6);
    CHECK(g2.edges == g3.edges);
    CHECK(g2.node_count == g3.node_count);
}

TEST_CASE("connectivity validation") {
    CHECK_THROWS_AS(sr::lattice_2d(blank(2, 2), 6), sr::ConfigError);
    CHECK_THROWS_AS(sr::lattice_3d(blank(2, 2, 2), 8), sr::ConfigError);
    CHECK_THROWS_AS(sr::lattice_2d(blank(0, 2), 4), sr::ConfigError);
}

TEST_CASE("edge weights") {
    // Two pixels, 1-d features 0 and 0.5: squared gap 0.25.
    sr::LabImage img = blank(2, 1, 1, 1);
    img.data = {0.0, 0.5};
    auto g = sr::lattice_2d(img, 4);
    REQUIRE(g.edges.size() == 1);

    sr::compute_weights(g, 2.0);
    CHECK(g.weights[0] == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

    sr::compute_weights(g, 0.0);
    CHECK(g.weights[0] == 1.0);

    img.data = {0.25, 0.25};
    auto same = sr::lattice_2d(img, 4);
    sr::compute_weights(same, 3.7);
    CHECK(same.weights[0] == 1.0);

    CHECK_THROWS_AS(sr::compute_weights(g, -1.0), sr::ConfigError);
}

TEST_CASE("weights are symmetric and monotone in feature distance") {
    std::mt19937_64 rng(21);
    sr::LabImage img = test::random_lab(4, 4, rng);
    auto g = sr::lattice_2d(img, 8);
    sr::compute_weights(g, 2.5);
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const auto [p, q] = g.edges[i];
        double d2 = 0.0;
        for (int d = 0; d < 3; ++d) {
            const double diff = img.data[3 * p + d] - img.data[3 * q + d];
            d2 += diff * diff;
        }
        CHECK(g.weights[i] == doctest::Approx(std::exp(-2.5 * d2)).epsilon(1e-12));
        CHECK(g.weights[i] > 0.0);
        CHECK(g.weights[i] <= 1.0);
    }
    // Monotone: recompute distances and check pairwise ordering.
    for (std::size_t i = 1; i < g.edges.size(); ++i) {
        const auto d2 = [&](std::size_t e) {
            const auto [p, q] = g.edges[e];
            double s = 0.0;
            for (int d = 0; d < 3; ++d) {
                const double diff = img.data[3 * p + d] - img.data[3 * q + d];
                s += diff * diff;
            }
            return s;
        };
        if (d2(i - 1) < d2(i)) CHECK(g.weights[i - 1] > g.weights[i]);
    }
}

TEST_CASE("auto_gamma") {
    sr::LabImage constant = blank(3, 3, 1, 1);
    auto g = sr::lattice_2d(constant, 4);
    CHECK(sr::auto_gamma(g) == 0.0);

    // Two features with squared gap 0.5 on every edge -> 1 / (2 * 0.5) = 1.
    sr::LabImage two = blank(2, 1, 1, 1);
    two.data = {0.0, std::sqrt(0.5)};
    CHECK(sr::auto_gamma(sr::lattice_2d(two, 4)) == doctest::Approx(1.0).epsilon(1e-12));

    // Mean squared gap 0.1 -> 5.
    sr::LabImage g01 = blank(2, 1, 1, 1);
    g01.data = {0.0, std::sqrt(0.1)};
    CHECK(sr::auto_gamma(sr::lattice_2d(g01, 4)) == doctest::Approx(5.0).epsilon(1e-12));

    sr::LabImage one = blank(1, 1, 1, 1);
    CHECK_THROWS_AS(sr::auto_gamma(sr::lattice_2d(one, 4)), sr::ConfigError);
}

TEST_CASE("adjacency index is sorted and complete") {
    const auto g = sr::lattice_2d(blank(4, 3), 8);
    const sr::AdjacencyIndex adj(g);
    std::size_t total = 0;
    for (std::uint32_t v = 0; v < g.node_count; ++v) {
        const auto nb = adj.neighbors(v);
        total += nb.size();
        CHECK(std::is_sorted(nb.begin(), nb.end()));
        for (const std::uint32_t u : nb) CHECK(u != v);
    }
    CHECK(total == 2 * g.edges.size());
}
