#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "sr/errors.hpp"
#include "sr/metrics.hpp"
#include "test_util.hpp"

namespace {

using Map = std::vector<std::int32_t>;

// Naive per-pixel oracles, straight from the definitions.

bool is_boundary(const Map& ids, int w, int h, int x, int y) {
    const std::int32_t v = ids[static_cast<std::size_t>(y) * w + x];
    if (x + 1 < w && ids[y * w + x + 1] != v) return true;
    if (x > 0 && ids[y * w + x - 1] != v) return true;
    if (y + 1 < h && ids[(y + 1) * w + x] != v) return true;
    if (y > 0 && ids[(y - 1) * w + x] != v) return true;
    return false;
}

double naive_br(const Map& seg, const Map& gt, int w, int h, int tol) {
    std::int64_t total = 0, hit = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!is_boundary(gt, w, h, x, y)) continue;
            ++total;
            bool found = false;
            for (int dy = -tol; dy <= tol && !found; ++dy) {
                for (int dx = -tol; dx <= tol && !found; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    if (is_boundary(seg, w, h, nx, ny)) found = true;
                }
            }
            if (found) ++hit;
        }
    }
    return total == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(total);
}

double naive_asa(const Map& seg, const Map& gt, int w, int h) {
    std::map<std::int32_t, std::map<std::int32_t, std::int64_t>> table;
    for (std::size_t i = 0; i < seg.size(); ++i) ++table[seg[i]][gt[i]];
    std::int64_t sum = 0;
    for (const auto& [r, row] : table) {
        std::int64_t best = 0;
        for (const auto& [g, c] : row) best = std::max(best, c);
        sum += best;
    }
    return static_cast<double>(sum) / static_cast<double>(w * h);
}

double naive_cue(const Map& seg, const Map& gt, int w, int h) {
    std::map<std::int32_t, std::map<std::int32_t, std::int64_t>> table;
    for (std::size_t i = 0; i < seg.size(); ++i) ++table[seg[i]][gt[i]];
    std::int64_t leak = 0;
    for (const auto& [r, row] : table) {
        std::int64_t total = 0, best = 0;
        for (const auto& [g, c] : row) {
            total += c;
            best = std::max(best, c);
        }
        leak += total - best;  // pixels outside the best-overlap segment
    }
    return static_cast<double>(leak) / static_cast<double>(w * h);
}

Map vertical_split(int w, int h, int divide) {
    Map m(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = divide; x < w; ++x) m[y * w + x] = 1;
    }
    return m;
}

Map random_map(int w, int h, int k, std::mt19937_64& rng) {
    return test::voronoi_labels(w, h, k, rng());
}

}  // namespace

TEST_CASE("identical maps score perfectly") {
    std::mt19937_64 rng(9);
    const Map m = random_map(20, 15, 6, rng);
    CHECK(sr::boundary_recall(m, m, 20, 15) == 1.0);
    CHECK(sr::cue(m, m, 20, 15) == 0.0);
    CHECK(sr::asa(m, m, 20, 15) == 1.0);
}

TEST_CASE("single-region segmentation recalls no boundaries") {
    const Map gt = vertical_split(20, 10, 10);
    const Map seg(200, 0);
    CHECK(sr::boundary_recall(seg, gt, 20, 10) == 0.0);
}

TEST_CASE("boundary recall against shifted stripes") {
    const int w = 20, h = 10;
    const Map gt = vertical_split(w, h, 10);  // boundary pixels in cols 9, 10

    // Divide shifted by 2: boundary cols 7/8, farthest gt boundary pixel at
    // Chebyshev distance 2 -> full recall at tol 2.
    CHECK(sr::boundary_recall(vertical_split(w, h, 8), gt, w, h, 2) == 1.0);

    // Shifted by 4: boundary cols 5/6, nearest distance 3 -> nothing within 2.
    CHECK(sr::boundary_recall(vertical_split(w, h, 6), gt, w, h, 2) == 0.0);

    // Shifted by 3: cols 6/7; col 9 is within 2 but col 10 is not -> half.
    CHECK(sr::boundary_recall(vertical_split(w, h, 7), gt, w, h, 2) ==
          doctest::Approx(0.5));
}

TEST_CASE("single region over a 60/40 ground truth") {
    const int w = 10, h = 10;
    const Map gt = vertical_split(w, h, 6);  // 60 / 40 pixels
    const Map seg(100, 0);
    CHECK(sr::cue(seg, gt, w, h) == doctest::Approx(0.40).epsilon(1e-12));
    CHECK(sr::asa(seg, gt, w, h) == doctest::Approx(0.60).epsilon(1e-12));
}

TEST_CASE("regions nested inside ground-truth segments leak nothing") {
    // Fine 2x2 blocks inside coarse halves.
    const int w = 8, h = 8;
    Map seg(64);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) seg[y * w + x] = (y / 2) * 4 + (x / 2);
    }
    const Map gt = vertical_split(w, h, 4);
    CHECK(sr::cue(seg, gt, w, h) == 0.0);
    CHECK(sr::asa(seg, gt, w, h) == 1.0);
}

TEST_CASE("fast metrics equal the naive oracles on random maps") {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 30; ++trial) {
        const int w = 8 + static_cast<int>(rng() % 25);
        const int h = 8 + static_cast<int>(rng() % 25);
        const Map seg = random_map(w, h, 2 + static_cast<int>(rng() % 8), rng);
        const Map gt = random_map(w, h, 2 + static_cast<int>(rng() % 5), rng);
        const int tol = static_cast<int>(rng() % 4);

        CAPTURE(trial);
        CHECK(sr::boundary_recall(seg, gt, w, h, tol) == naive_br(seg, gt, w, h, tol));
        CHECK(sr::cue(seg, gt, w, h) == naive_cue(seg, gt, w, h));
        CHECK(sr::asa(seg, gt, w, h) == naive_asa(seg, gt, w, h));

        // Complement identity.
        CHECK(std::abs(sr::asa(seg, gt, w, h) + sr::cue(seg, gt, w, h) - 1.0) <=
              1e-12);

        // Tolerance monotonicity.
        CHECK(sr::boundary_recall(seg, gt, w, h, tol + 1) >=
              sr::boundary_recall(seg, gt, w, h, tol));
    }
}

TEST_CASE("splitting a region never lowers ASA") {
    std::mt19937_64 rng(555);
    for (int trial = 0; trial < 20; ++trial) {
        const int w = 16, h = 16;
        Map seg = random_map(w, h, 5, rng);
        const Map gt = random_map(w, h, 4, rng);
        const double before = sr::asa(seg, gt, w, h);

        // Split region 0 by parity of the pixel index.
        const std::int32_t fresh = 1000;
        for (std::size_t i = 0; i < seg.size(); ++i) {
            if (seg[i] == 0 && i % 2 == 0) seg[i] = fresh;
        }
        CHECK(sr::asa(seg, gt, w, h) >= before - 1e-15);
    }
}

TEST_CASE("evaluate aggregates annotations by mean") {
    const int w = 20, h = 10;
    const Map seg = vertical_split(w, h, 8);

    SUBCASE("single annotation equals the individual metrics") {
        const Map gt = vertical_split(w, h, 10);
        const sr::MetricReport rep = sr::evaluate(seg, {gt}, w, h, 2);
        CHECK(rep.br == sr::boundary_recall(seg, gt, w, h, 2));
        CHECK(rep.cue == sr::cue(seg, gt, w, h));
        CHECK(rep.asa == sr::asa(seg, gt, w, h));
        CHECK(rep.region_count == 2);
    }

    SUBCASE("identical annotations have the same mean") {
        const Map gt = vertical_split(w, h, 10);
        const sr::MetricReport rep = sr::evaluate(seg, {gt, gt}, w, h, 2);
        CHECK(rep.br == sr::boundary_recall(seg, gt, w, h, 2));
        CHECK(rep.per_gt_br.size() == 2);
    }

    SUBCASE("BR 1.0 and 0.5 average to 0.75") {
        const Map gt_full = vertical_split(w, h, 10);  // shifted by 2 -> 1.0
        const Map gt_half = vertical_split(w, h, 11);  // shifted by 3 -> 0.5
        const sr::MetricReport rep = sr::evaluate(seg, {gt_full, gt_half}, w, h, 2);
        CHECK(rep.per_gt_br[0] == 1.0);
        CHECK(rep.per_gt_br[1] == doctest::Approx(0.5));
        CHECK(rep.br == doctest::Approx(0.75));
    }
}

TEST_CASE("errors") {
    const Map a(20, 0), b(12, 0);
    CHECK_THROWS_AS(sr::boundary_recall(a, b, 5, 4), sr::ConfigError);
    CHECK_THROWS_AS(sr::cue(a, b, 5, 4), sr::ConfigError);
    CHECK_THROWS_AS(sr::evaluate(a, {}, 5, 4), sr::ConfigError);
}
