#include "sr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "sr/errors.hpp"

namespace sr {

namespace {

void check_dims(std::span<const std::int32_t> seg, std::span<const std::int32_t> gt,
                int width, int height) {
    const std::size_t n = static_cast<std::size_t>(width) * height;
    if (width <= 0 || height <= 0 || seg.size() != n || gt.size() != n) {
        throw ConfigError("segmentation and ground truth dimensions do not match");
    }
}

std::vector<std::uint8_t> boundary_mask(std::span<const std::int32_t> ids, int w,
                                        int h) {
    std::vector<std::uint8_t> mask(ids.size(), 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            const std::int32_t v = ids[p];
            if ((x + 1 < w && ids[p + 1] != v) || (x > 0 && ids[p - 1] != v) ||
                (y + 1 < h && ids[p + w] != v) || (y > 0 && ids[p - w] != v)) {
                mask[p] = 1;
            }
        }
    }
    return mask;
}

// Chebyshev dilation by tol: separable max over a (2*tol+1) window,
// horizontal then vertical.
std::vector<std::uint8_t> dilate_chebyshev(const std::vector<std::uint8_t>& mask,
                                           int w, int h, int tol) {
    if (tol <= 0) return mask;
    std::vector<std::uint8_t> tmp(mask.size(), 0);
    for (int y = 0; y < h; ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            if (!mask[row + x]) continue;
            const int x0 = std::max(0, x - tol);
            const int x1 = std::min(w - 1, x + tol);
            for (int xx = x0; xx <= x1; ++xx) tmp[row + xx] = 1;
        }
    }
    std::vector<std::uint8_t> out(mask.size(), 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!tmp[static_cast<std::size_t>(y) * w + x]) continue;
            const int y0 = std::max(0, y - tol);
            const int y1 = std::min(h - 1, y + tol);
            for (int yy = y0; yy <= y1; ++yy) {
                out[static_cast<std::size_t>(yy) * w + x] = 1;
            }
        }
    }
    return out;
}

// Sum over regions of the largest overlap with any ground-truth segment.
std::int64_t max_overlap_sum(std::span<const std::int32_t> seg,
                             std::span<const std::int32_t> gt) {
    std::unordered_map<std::int64_t, std::int64_t> counts;
    counts.reserve(seg.size() / 16 + 8);
    for (std::size_t i = 0; i < seg.size(); ++i) {
        const std::int64_t key =
            (static_cast<std::int64_t>(seg[i]) << 32) ^
            static_cast<std::int64_t>(static_cast<std::uint32_t>(gt[i]));
        ++counts[key];
    }
    std::unordered_map<std::int32_t, std::int64_t> best;
    for (const auto& [key, c] : counts) {
        const std::int32_t r = static_cast<std::int32_t>(key >> 32);
        auto& b = best[r];
        b = std::max(b, c);
    }
    std::int64_t sum = 0;
    for (const auto& [r, b] : best) sum += b;
    return sum;
}

}  // namespace

double boundary_recall(std::span<const std::int32_t> seg,
                       std::span<const std::int32_t> gt, int width, int height,
                       int tol) {
    check_dims(seg, gt, width, height);
    const auto gt_b = boundary_mask(gt, width, height);
    const auto seg_near =
        dilate_chebyshev(boundary_mask(seg, width, height), width, height, tol);

    std::int64_t total = 0, hit = 0;
    for (std::size_t i = 0; i < gt_b.size(); ++i) {
        if (!gt_b[i]) continue;
        ++total;
        if (seg_near[i]) ++hit;
    }
    if (total == 0) return 1.0;
    return static_cast<double>(hit) / static_cast<double>(total);
}

double cue(std::span<const std::int32_t> seg, std::span<const std::int32_t> gt,
           int width, int height) {
    check_dims(seg, gt, width, height);
    const std::int64_t s = static_cast<std::int64_t>(seg.size());
    // Pixels of each region outside its best-matching segment.
    const std::int64_t leak = s - max_overlap_sum(seg, gt);
    return static_cast<double>(leak) / static_cast<double>(s);
}

double asa(std::span<const std::int32_t> seg, std::span<const std::int32_t> gt,
           int width, int height) {
    check_dims(seg, gt, width, height);
    return static_cast<double>(max_overlap_sum(seg, gt)) /
           static_cast<double>(seg.size());
}

MetricReport evaluate(std::span<const std::int32_t> seg,
                      const std::vector<std::vector<std::int32_t>>& gts, int width,
                      int height, int tol) {
    if (gts.empty()) throw ConfigError("at least one ground-truth map is required");

    MetricReport rep;
    for (const auto& gt : gts) {
        rep.per_gt_br.push_back(boundary_recall(seg, gt, width, height, tol));
        rep.per_gt_cue.push_back(cue(seg, gt, width, height));
        rep.per_gt_asa.push_back(asa(seg, gt, width, height));
        if (std::abs(rep.per_gt_asa.back() + rep.per_gt_cue.back() - 1.0) > 1e-12) {
            throw std::logic_error("asa and cue are not complementary");
        }
    }
    const auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    rep.br = mean(rep.per_gt_br);
    rep.cue = mean(rep.per_gt_cue);
    rep.asa = mean(rep.per_gt_asa);

    std::vector<std::int32_t> ids(seg.begin(), seg.end());
    std::sort(ids.begin(), ids.end());
    rep.region_count = std::unique(ids.begin(), ids.end()) - ids.begin();
    return rep;
}

}  // namespace sr
