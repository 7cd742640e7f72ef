#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sr/color.hpp"
#include "sr/errors.hpp"
#include "sr/hierarchy.hpp"
#include "sr/metrics.hpp"
#include "sr/quantize.hpp"

namespace py = pybind11;

namespace {

// Accepts (H, W, 3) or (D, H, W, 3) uint8 arrays.
sr::RgbImage rgb_from_array(const py::array_t<std::uint8_t>& arr) {
    const py::buffer_info info = arr.request();
    if ((info.ndim != 3 && info.ndim != 4) || info.shape[info.ndim - 1] != 3) {
        throw sr::ConfigError("expected an (H, W, 3) or (D, H, W, 3) uint8 array");
    }
    sr::RgbImage img;
    if (info.ndim == 3) {
        img.height = static_cast<int>(info.shape[0]);
        img.width = static_cast<int>(info.shape[1]);
        img.depth = 1;
    } else {
        img.depth = static_cast<int>(info.shape[0]);
        img.height = static_cast<int>(info.shape[1]);
        img.width = static_cast<int>(info.shape[2]);
    }
    img.data.resize(img.pixel_count() * 3);
    std::size_t i = 0;
    if (info.ndim == 3) {
        const auto v = arr.unchecked<3>();
        for (py::ssize_t y = 0; y < v.shape(0); ++y) {
            for (py::ssize_t x = 0; x < v.shape(1); ++x) {
                img.data[i++] = v(y, x, 0);
                img.data[i++] = v(y, x, 1);
                img.data[i++] = v(y, x, 2);
            }
        }
    } else {
        const auto v = arr.unchecked<4>();
        for (py::ssize_t z = 0; z < v.shape(0); ++z) {
            for (py::ssize_t y = 0; y < v.shape(1); ++y) {
                for (py::ssize_t x = 0; x < v.shape(2); ++x) {
                    img.data[i++] = v(z, y, x, 0);
                    img.data[i++] = v(z, y, x, 1);
                    img.data[i++] = v(z, y, x, 2);
                }
            }
        }
    }
    return img;
}

py::array_t<std::int32_t> labels_to_array(const sr::Rag& rag) {
    std::vector<py::ssize_t> shape;
    if (rag.depth > 1) shape.push_back(rag.depth);
    shape.push_back(rag.height);
    shape.push_back(rag.width);
    py::array_t<std::int32_t> out(shape);
    std::copy(rag.pixel_map.begin(), rag.pixel_map.end(),
              out.mutable_data());
    return out;
}

std::vector<std::int32_t> labels_from_array(const py::array_t<std::int32_t>& arr,
                                            int* width, int* height, int* depth) {
    const py::buffer_info info = arr.request();
    if (info.ndim != 2 && info.ndim != 3) {
        throw sr::ConfigError("expected an (H, W) or (D, H, W) int32 label array");
    }
    if (info.ndim == 2) {
        *depth = 1;
        *height = static_cast<int>(info.shape[0]);
        *width = static_cast<int>(info.shape[1]);
    } else {
        *depth = static_cast<int>(info.shape[0]);
        *height = static_cast<int>(info.shape[1]);
        *width = static_cast<int>(info.shape[2]);
    }
    std::vector<std::int32_t> ids(static_cast<std::size_t>(*width) * *height * *depth);
    auto flat = arr.attr("ravel")().cast<py::array_t<std::int32_t>>();
    std::copy(flat.data(), flat.data() + ids.size(), ids.begin());
    return ids;
}

sr::LevelConfig make_config(int k, double lambda, std::optional<double> gamma,
                            std::optional<std::int64_t> n, std::size_t samples,
                            int restarts, std::uint64_t seed, int max_cycles) {
    sr::LevelConfig cfg;
    cfg.k = k;
    cfg.lambda = lambda;
    cfg.gamma = gamma;
    cfg.n_target = n;
    cfg.samples = samples;
    cfg.restarts = restarts;
    cfg.seed = seed;
    cfg.max_cycles = max_cycles;
    return cfg;
}

py::dict stats_to_dict(const sr::LevelStats& s, std::size_t region_count) {
    py::dict d;
    d["k_used"] = s.k_used;
    d["gamma_used"] = s.gamma_used;
    d["energy_init"] = s.energy_init;
    d["energy_final"] = s.energy_final;
    d["region_count"] = region_count;
    d["wall_ms"] = s.wall_ms;
    return d;
}

}  // namespace

PYBIND11_MODULE(_superregions, m) {
    m.doc() = "Hierarchical piecewise-constant super-region segmentation";

    py::register_exception<sr::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<sr::IoError>(m, "IoError", PyExc_IOError);

    m.def(
        "rgb_to_lab",
        [](const py::array_t<std::uint8_t>& rgb) {
            const sr::RgbImage img = rgb_from_array(rgb);
            const sr::LabImage lab = sr::rgb_to_lab_normalized(img);
            std::vector<py::ssize_t> shape;
            if (lab.depth > 1) shape.push_back(lab.depth);
            shape.push_back(lab.height);
            shape.push_back(lab.width);
            shape.push_back(3);
            py::array_t<double> out(shape);
            std::copy(lab.data.begin(), lab.data.end(), out.mutable_data());
            return out;
        },
        py::arg("rgb"),
        "sRGB (D65) to normalized L*a*b features in [0,1], per pixel.");

    m.def(
        "fit_palette",
        [](const py::array_t<double>& features, int k, std::size_t samples,
           int restarts, std::uint64_t seed) {
            const py::buffer_info info = features.request();
            if (info.ndim != 2) {
                throw sr::ConfigError("expected an (N, D) float array");
            }
            const int dim = static_cast<int>(info.shape[1]);
            auto flat = features.attr("ravel")().cast<py::array_t<double>>();
            std::vector<double> data(flat.data(), flat.data() + info.shape[0] * dim);
            sr::QuantizeConfig cfg;
            cfg.k = k;
            cfg.samples = samples;
            cfg.restarts = restarts;
            cfg.seed = seed;
            const sr::Palette p = sr::fit_palette(data, dim, cfg);
            py::array_t<double> centers({static_cast<py::ssize_t>(p.k),
                                         static_cast<py::ssize_t>(p.dim)});
            std::copy(p.centers.begin(), p.centers.end(), centers.mutable_data());
            return py::make_tuple(centers, p.inertia);
        },
        py::arg("features"), py::arg("k") = 16, py::arg("samples") = 10000,
        py::arg("restarts") = 10, py::arg("seed") = 0,
        "Sampled k-means with k-means++ restarts; returns (centers, inertia).");

    m.def(
        "segment",
        [](const py::array_t<std::uint8_t>& rgb, std::optional<std::int64_t> n,
           int k, double lambda, std::optional<double> gamma, int connectivity,
           std::size_t samples, int restarts, std::uint64_t seed, int max_cycles) {
            const sr::RgbImage img = rgb_from_array(rgb);
            const sr::LabImage lab = sr::rgb_to_lab_normalized(img);
            const sr::LevelConfig cfg = make_config(k, lambda, gamma, n, samples,
                                                    restarts, seed, max_cycles);
            sr::HierarchyResult res;
            {
                py::gil_scoped_release release;
                res = sr::run_hierarchy(
                    lab, std::span<const sr::LevelConfig>(&cfg, 1), connectivity);
            }
            return py::make_tuple(labels_to_array(res.levels[0]),
                                  stats_to_dict(res.stats[0],
                                                res.levels[0].regions.size()));
        },
        py::arg("rgb"), py::arg("n") = std::nullopt, py::arg("k") = 16,
        py::arg("lam") = 0.1, py::arg("gamma") = std::nullopt,
        py::arg("connectivity") = 0, py::arg("samples") = 10000,
        py::arg("restarts") = 10, py::arg("seed") = 0, py::arg("max_cycles") = 5,
        "Level-1 segmentation; returns (labels, stats). Works on (H, W, 3) "
        "images and (D, H, W, 3) volumes.");

    m.def(
        "hierarchy",
        [](const py::array_t<std::uint8_t>& rgb,
           const std::vector<std::tuple<int, double, std::int64_t>>& levels, int k,
           double lambda, std::optional<double> gamma,
           std::optional<std::int64_t> n, int connectivity, std::size_t samples,
           int restarts, std::uint64_t seed, int max_cycles) {
            const sr::RgbImage img = rgb_from_array(rgb);
            const sr::LabImage lab = sr::rgb_to_lab_normalized(img);
            std::vector<sr::LevelConfig> configs;
            configs.push_back(make_config(k, lambda, gamma, n, samples, restarts,
                                          seed, max_cycles));
            for (const auto& [lk, llambda, ln] : levels) {
                sr::LevelConfig cfg = configs.front();
                cfg.k = lk;
                cfg.lambda = llambda;
                cfg.n_target =
                    ln > 0 ? std::optional<std::int64_t>(ln) : std::nullopt;
                cfg.seed = configs.front().seed + configs.size();
                configs.push_back(cfg);
            }
            sr::HierarchyResult res;
            {
                py::gil_scoped_release release;
                res = sr::run_hierarchy(lab, configs, connectivity);
            }
            py::list maps;
            py::list stats;
            for (std::size_t i = 0; i < res.levels.size(); ++i) {
                maps.append(labels_to_array(res.levels[i]));
                stats.append(
                    stats_to_dict(res.stats[i], res.levels[i].regions.size()));
            }
            return py::make_tuple(maps, stats);
        },
        py::arg("rgb"), py::arg("levels"), py::arg("k") = 16, py::arg("lam") = 0.1,
        py::arg("gamma") = std::nullopt, py::arg("n") = std::nullopt,
        py::arg("connectivity") = 0, py::arg("samples") = 10000,
        py::arg("restarts") = 10, py::arg("seed") = 0, py::arg("max_cycles") = 5,
        "Level 1 from the keyword options, then one (k, lambda, n) tuple per "
        "further level (n=0 for unconstrained). Returns (label maps, stats).");

    m.def(
        "coarsen",
        [](const py::array_t<std::int32_t>& labels,
           const py::array_t<std::uint8_t>& rgb, int k, double lambda,
           std::optional<double> gamma, std::optional<std::int64_t> n,
           int connectivity, std::size_t samples, int restarts,
           std::uint64_t seed, int max_cycles) {
            const sr::RgbImage img = rgb_from_array(rgb);
            const sr::LabImage lab = sr::rgb_to_lab_normalized(img);
            int w = 0, h = 0, d = 0;
            const std::vector<std::int32_t> ids =
                labels_from_array(labels, &w, &h, &d);
            if (w != img.width || h != img.height || d != img.depth) {
                throw sr::ConfigError(
                    "label map dimensions do not match the image");
            }
            const sr::LevelConfig cfg = make_config(k, lambda, gamma, n, samples,
                                                    restarts, seed, max_cycles);
            sr::Rag out;
            sr::LevelStats stats;
            {
                py::gil_scoped_release release;
                const sr::Rag prev = sr::ingest_label_map(ids, lab, connectivity);
                out = sr::run_level(prev, cfg, &stats);
            }
            return py::make_tuple(labels_to_array(out),
                                  stats_to_dict(stats, out.regions.size()));
        },
        py::arg("labels"), py::arg("rgb"), py::arg("k") = 16, py::arg("lam") = 0.1,
        py::arg("gamma") = std::nullopt, py::arg("n") = std::nullopt,
        py::arg("connectivity") = 0, py::arg("samples") = 10000,
        py::arg("restarts") = 10, py::arg("seed") = 0, py::arg("max_cycles") = 5,
        "One hierarchy level over an existing (foreign) label map.");

    const auto as_2d_pair = [](const py::array_t<std::int32_t>& seg,
                               const py::array_t<std::int32_t>& gt) {
        int sw = 0, sh = 0, sd = 0, gw = 0, gh = 0, gd = 0;
        auto s = labels_from_array(seg, &sw, &sh, &sd);
        auto g = labels_from_array(gt, &gw, &gh, &gd);
        if (sd != 1 || gd != 1 || sw != gw || sh != gh) {
            throw sr::ConfigError("expected matching 2D label maps");
        }
        return std::make_tuple(std::move(s), std::move(g), sw, sh);
    };

    m.def(
        "boundary_recall",
        [as_2d_pair](const py::array_t<std::int32_t>& seg,
                     const py::array_t<std::int32_t>& gt, int tol) {
            const auto [s, g, w, h] = as_2d_pair(seg, gt);
            return sr::boundary_recall(s, g, w, h, tol);
        },
        py::arg("seg"), py::arg("gt"), py::arg("tol") = 2);

    m.def(
        "cue",
        [as_2d_pair](const py::array_t<std::int32_t>& seg,
                     const py::array_t<std::int32_t>& gt) {
            const auto [s, g, w, h] = as_2d_pair(seg, gt);
            return sr::cue(s, g, w, h);
        },
        py::arg("seg"), py::arg("gt"));

    m.def(
        "asa",
        [as_2d_pair](const py::array_t<std::int32_t>& seg,
                     const py::array_t<std::int32_t>& gt) {
            const auto [s, g, w, h] = as_2d_pair(seg, gt);
            return sr::asa(s, g, w, h);
        },
        py::arg("seg"), py::arg("gt"));

    m.def(
        "evaluate",
        [](const py::array_t<std::int32_t>& seg,
           const std::vector<py::array_t<std::int32_t>>& gts, int tol) {
            int w = 0, h = 0, d = 0;
            const auto s = labels_from_array(seg, &w, &h, &d);
            if (d != 1) throw sr::ConfigError("evaluate supports 2D maps only");
            std::vector<std::vector<std::int32_t>> gt_maps;
            for (const auto& gt : gts) {
                int gw = 0, gh = 0, gd = 0;
                auto g = labels_from_array(gt, &gw, &gh, &gd);
                if (gw != w || gh != h || gd != 1) {
                    throw sr::ConfigError("ground truth dimensions do not match");
                }
                gt_maps.push_back(std::move(g));
            }
            const sr::MetricReport rep = sr::evaluate(s, gt_maps, w, h, tol);
            py::dict out;
            out["br"] = rep.br;
            out["cue"] = rep.cue;
            out["asa"] = rep.asa;
            out["region_count"] = rep.region_count;
            out["per_gt_br"] = rep.per_gt_br;
            out["per_gt_cue"] = rep.per_gt_cue;
            out["per_gt_asa"] = rep.per_gt_asa;
            return out;
        },
        py::arg("seg"), py::arg("gts"), py::arg("tol") = 2,
        "All three metrics against one or more annotations (means + per-gt).");
}
