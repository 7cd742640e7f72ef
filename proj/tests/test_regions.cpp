#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "sr/errors.hpp"
#include "sr/gridgraph.hpp"
#include "sr/regions.hpp"
#include "test_util.hpp"

namespace {

sr::LabImage blank(int w, int h, int channels = 1) {
    sr::LabImage img;
    img.width = w;
    img.height = h;
    img.channels = channels;
    img.data.assign(static_cast<std::size_t>(w) * h * channels, 0.0);
    return img;
}

// Clean-room re-implementation of the documented flood order, used as an
// oracle for the capped component search: ascending seeds, FIFO queue,
// ascending neighbor visits, close at floor(s_max) accumulated size.
std::vector<std::int64_t> simulate_split_sizes(int w, int h,
                                               const std::vector<int>& labels,
                                               double s_max) {
    const int n = w * h;
    const double cap = std::floor(s_max);
    std::vector<int> comp(n, -1);
    std::vector<char> queued(n, 0);
    std::vector<std::int64_t> sizes;
    for (int seed = 0; seed < n; ++seed) {
        if (comp[seed] >= 0) continue;
        std::vector<int> fifo{seed};
        queued[seed] = 1;
        std::size_t head = 0;
        std::int64_t size = 0;
        const int id = static_cast<int>(sizes.size());
        while (head < fifo.size()) {
            const int v = fifo[head++];
            comp[v] = id;
            ++size;
            if (static_cast<double>(size) >= cap) break;
            const int x = v % w, y = v / w;
            const int nbs[4] = {y > 0 ? v - w : -1, x > 0 ? v - 1 : -1,
                                x + 1 < w ? v + 1 : -1, y + 1 < h ? v + w : -1};
            std::vector<int> cand;
            for (int u : nbs) {
                if (u >= 0 && !queued[u] && comp[u] < 0 && labels[u] == labels[v]) {
                    cand.push_back(u);
                }
            }
            std::sort(cand.begin(), cand.end());
            for (int u : cand) {
                queued[u] = 1;
                fifo.push_back(u);
            }
        }
        for (std::size_t i = head; i < fifo.size(); ++i) queued[fifo[i]] = 0;
        sizes.push_back(size);
    }
    return sizes;
}

// Flood-fill check that every region's pixels are connected in the lattice.
bool regions_connected(const sr::Rag& rag, int w, int h) {
    const int n = w * h;
    std::vector<char> seen(n, 0);
    for (const sr::Region& r : rag.regions) {
        int start = -1;
        for (int i = 0; i < n; ++i) {
            if (rag.pixel_map[i] == r.id) {
                start = i;
                break;
            }
        }
        if (start < 0) return false;
        std::vector<int> stack{start};
        seen[start] = 2;
        std::int64_t count = 0;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            ++count;
            const int x = v % w, y = v / w;
            const int nbs[4] = {y > 0 ? v - w : -1, x > 0 ? v - 1 : -1,
                                x + 1 < w ? v + 1 : -1, y + 1 < h ? v + w : -1};
            for (int u : nbs) {
                if (u >= 0 && seen[u] != 2 && rag.pixel_map[u] == r.id) {
                    seen[u] = 2;
                    stack.push_back(u);
                }
            }
        }
        if (count != r.size) return false;
    }
    return true;
}

bool rag_equal(const sr::Rag& a, const sr::Rag& b) {
    if (a.pixel_map != b.pixel_map || a.adjacency != b.adjacency ||
        a.regions.size() != b.regions.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.regions.size(); ++i) {
        if (a.regions[i].id != b.regions[i].id ||
            a.regions[i].label != b.regions[i].label ||
            a.regions[i].size != b.regions[i].size ||
            a.regions[i].mean != b.regions[i].mean) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("size bounds from a target count") {
    const sr::SizeBounds b = sr::SizeBounds::from_target(4, 400);
    CHECK(b.s_min == doctest::Approx(20.0));
    CHECK(b.s_max == doctest::Approx(200.0));
    REQUIRE(b.n_target.has_value());
    CHECK(*b.n_target == 4);
    CHECK_THROWS_AS(sr::SizeBounds::from_target(0, 100), sr::ConfigError);

    const sr::SizeBounds u = sr::SizeBounds::unconstrained();
    CHECK(u.s_min == 0.0);
    CHECK(std::isinf(u.s_max));
}

TEST_CASE("unconstrained split of a constant labeling is one region") {
    const auto g = sr::lattice_2d(blank(10, 10), 4);
    const sr::Labeling l(100, 0);
    const sr::Rag rag = sr::split_components(g, l, 200.0);
    REQUIRE(rag.regions.size() == 1);
    CHECK(rag.regions[0].size == 100);
    CHECK(rag.regions[0].label == 0);
    CHECK(rag.adjacency.empty());
}

TEST_CASE("capped split follows the documented flood order") {
    const auto g = sr::lattice_2d(blank(10, 10), 4);
    std::vector<int> labels(100, 0);
    const sr::Labeling l(labels.begin(), labels.end());
    const sr::Rag rag = sr::split_components(g, l, 30.0);

    const auto want = simulate_split_sizes(10, 10, labels, 30.0);
    REQUIRE(rag.regions.size() == want.size());
    // Three full components of 30; the 10 leftover cells are disconnected
    // into pieces of 3 and 7 by the flood front.
    CHECK(want == std::vector<std::int64_t>{30, 30, 30, 3, 7});
    std::int64_t total = 0;
    for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(rag.regions[i].size == want[i]);
        total += rag.regions[i].size;
    }
    CHECK(total == 100);

    // Random labelings against the same oracle.
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<int> rl(100);
        for (auto& v : rl) v = static_cast<int>(rng() % 3);
        const double s_max = 5.0 + 40.0 * test::urand(rng);
        const sr::Rag got = sr::split_components(g, sr::Labeling(rl.begin(), rl.end()),
                                                 s_max);
        const auto sizes = simulate_split_sizes(10, 10, rl, s_max);
        REQUIRE(got.regions.size() == sizes.size());
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            CHECK(got.regions[i].size == sizes[i]);
        }
    }
}

TEST_CASE("two-label halves give two regions and one adjacency edge") {
    const auto g = sr::lattice_2d(blank(8, 4), 4);
    sr::Labeling l(32, 0);
    for (int y = 0; y < 4; ++y) {
        for (int x = 4; x < 8; ++x) l[y * 8 + x] = 1;
    }
    const sr::Rag rag = sr::split_components(g, l, 1e9);
    REQUIRE(rag.regions.size() == 2);
    CHECK(rag.regions[0].size == 16);
    CHECK(rag.regions[1].size == 16);
    REQUIRE(rag.adjacency.size() == 1);
    CHECK(rag.adjacency[0] == std::pair<std::int32_t, std::int32_t>{0, 1});
}

TEST_CASE("merge absorbs a small region into its neighbor") {
    sr::RegionGraph g;
    g.node_count = 2;
    g.feature_dim = 1;
    g.features = {0.2, 0.8};
    g.sizes = {3, 100};
    g.edges = {{0, 1}};
    g.weights = {1.0};
    const auto pal = test::make_palette({{0.2}, {0.8}});
    const sr::Labeling l = {0, 1};
    sr::Rag rag = sr::split_components(g, l, 1e9);
    REQUIRE(rag.regions.size() == 2);

    const sr::Rag merged = sr::merge_small(std::move(rag), pal, 5.0);
    REQUIRE(merged.regions.size() == 1);
    CHECK(merged.regions[0].size == 103);
    CHECK(merged.regions[0].label == 1);  // survivor keeps its label
    CHECK(merged.regions[0].mean[0] ==
          doctest::Approx((3 * 0.2 + 100 * 0.8) / 103.0).epsilon(1e-12));
    CHECK(merged.pixel_map == std::vector<std::int32_t>{0, 0});
}

TEST_CASE("merge is a no-op when every region is large enough") {
    const auto g = sr::lattice_2d(blank(8, 4), 4);
    sr::Labeling l(32, 0);
    for (int y = 0; y < 4; ++y) {
        for (int x = 4; x < 8; ++x) l[y * 8 + x] = 1;
    }
    const auto pal = test::make_palette({{0.1}, {0.9}});
    const sr::Rag before = sr::split_components(g, l, 1e9);
    const sr::Rag after = sr::merge_small(before, pal, 10.0);
    CHECK(rag_equal(before, after));
}

TEST_CASE("chain merge follows the similarity priority") {
    // a(2, label0) - b(2, label1) - c(100, label2), centers 0.0 / 0.1 / 0.9.
    // Closest pair (a,b) merges first into a (tie on size, lower id), then
    // the 4-sized survivor merges into c. Survivor label: c's.
    sr::RegionGraph g;
    g.node_count = 3;
    g.feature_dim = 1;
    g.features = {0.0, 0.1, 0.9};
    g.sizes = {2, 2, 100};
    g.edges = {{0, 1}, {1, 2}};
    g.weights = {1.0, 1.0};
    const auto pal = test::make_palette({{0.0}, {0.1}, {0.9}});
    const sr::Labeling l = {0, 1, 2};

    sr::Rag rag = sr::split_components(g, l, 1e9);
    const sr::Rag merged = sr::merge_small(std::move(rag), pal, 5.0);
    REQUIRE(merged.regions.size() == 1);
    CHECK(merged.regions[0].label == 2);
    CHECK(merged.regions[0].size == 104);
    CHECK(merged.regions[0].mean[0] ==
          doctest::Approx((2 * 0.0 + 2 * 0.1 + 100 * 0.9) / 104.0).epsilon(1e-12));
}

TEST_CASE("unconstrained enforce_count equals plain connected components") {
    std::mt19937_64 rng(12);
    const auto img = blank(12, 9);
    const auto g = sr::lattice_2d(img, 4);
    const auto pal = test::random_palette(4, 1, rng);
    for (int trial = 0; trial < 10; ++trial) {
        sr::Labeling l(g.node_count);
        for (auto& v : l) v = static_cast<int>(rng() % 4);
        sr::SizeBounds b;
        b.s_min = 0.0;
        b.s_max = static_cast<double>(g.node_count);
        const sr::Rag a = sr::enforce_count(g, l, b, pal);
        const sr::Rag c = sr::connected_components(g, l);
        CHECK(rag_equal(a, c));
    }
}

TEST_CASE("partition, connectivity and size invariants hold") {
    std::mt19937_64 rng(2025);
    const int w = 16, h = 16;
    const auto g = sr::lattice_2d(blank(w, h), 4);
    const auto pal = test::random_palette(4, 1, rng);

    for (int trial = 0; trial < 20; ++trial) {
        sr::Labeling l(g.node_count);
        for (auto& v : l) v = static_cast<int>(rng() % 4);
        sr::SizeBounds b;
        b.s_min = 1.0 + 10.0 * test::urand(rng);
        b.s_max = b.s_min + 2.0 + 60.0 * test::urand(rng);

        const sr::Rag split = sr::split_components(g, l, b.s_max);
        std::int64_t total = 0;
        for (const auto& r : split.regions) {
            CHECK(static_cast<double>(r.size) <= std::floor(b.s_max));
            total += r.size;
        }
        CHECK(total == w * h);
        CHECK(regions_connected(split, w, h));

        const sr::Rag merged = sr::merge_small(split, pal, b.s_min);
        total = 0;
        for (const auto& r : merged.regions) {
            if (merged.regions.size() > 1) {
                CHECK(static_cast<double>(r.size) >= b.s_min);
            }
            total += r.size;
        }
        CHECK(total == w * h);
        CHECK(regions_connected(merged, w, h));
        CHECK(merged.regions.size() <= split.regions.size());

        // Mean consistency against a direct per-pixel recomputation.
        std::vector<double> sums(merged.regions.size(), 0.0);
        std::vector<std::int64_t> counts(merged.regions.size(), 0);
        for (std::size_t px = 0; px < g.node_count; ++px) {
            sums[merged.pixel_map[px]] += g.features[px];
            ++counts[merged.pixel_map[px]];
        }
        for (const auto& r : merged.regions) {
            CHECK(r.mean[0] ==
                  doctest::Approx(sums[r.id] / counts[r.id]).epsilon(1e-9));
        }

        // Determinism.
        const sr::Rag again = sr::merge_small(sr::split_components(g, l, b.s_max),
                                              pal, b.s_min);
        CHECK(rag_equal(merged, again));
    }
}

TEST_CASE("checkerboard with s_min above the cell size merges everything upward") {
    const int w = 6, h = 6;
    const auto g = sr::lattice_2d(blank(w, h), 4);
    sr::Labeling l(g.node_count);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) l[y * w + x] = (x + y) % 2;
    }
    const auto pal = test::make_palette({{0.0}, {1.0}});
    sr::SizeBounds b;
    b.s_min = 2.0;
    b.s_max = static_cast<double>(w * h);
    const sr::Rag rag = sr::enforce_count(g, l, b, pal);
    std::int64_t total = 0;
    for (const auto& r : rag.regions) {
        if (rag.regions.size() > 1) CHECK(r.size >= 2);
        total += r.size;
    }
    CHECK(total == w * h);
    CHECK(regions_connected(rag, w, h));
}

TEST_CASE("adjacency after merge only connects touching regions") {
    std::mt19937_64 rng(77);
    const int w = 12, h = 12;
    const auto g = sr::lattice_2d(blank(w, h), 4);
    const auto pal = test::random_palette(3, 1, rng);
    sr::Labeling l(g.node_count);
    for (auto& v : l) v = static_cast<int>(rng() % 3);

    sr::SizeBounds b;
    b.s_min = 4.0;
    b.s_max = 60.0;
    const sr::Rag rag = sr::enforce_count(g, l, b, pal);

    std::set<std::pair<std::int32_t, std::int32_t>> want;
    for (const auto& [p, q] : g.edges) {
        const auto rp = rag.pixel_map[p], rq = rag.pixel_map[q];
        if (rp != rq) want.emplace(std::min(rp, rq), std::max(rp, rq));
    }
    const std::set<std::pair<std::int32_t, std::int32_t>> got(rag.adjacency.begin(),
                                                              rag.adjacency.end());
    CHECK(got == want);
}
