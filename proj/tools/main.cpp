#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sr/color.hpp"
#include "sr/errors.hpp"
#include "sr/hierarchy.hpp"
#include "sr/imgio.hpp"
#include "sr/metrics.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kSeedEnv = "SUPERREGIONS_SEED";

struct CommonOpts {
    int k = 16;
    double lambda = 0.1;
    std::string gamma = "auto";
    int connectivity = 0;  // 0: 4 in 2D, 6 in 3D
    std::size_t samples = 10000;
    int restarts = 10;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::optional<std::int64_t> n;
    bool no_size_constraint = false;
    bool no_unary_size_weight = false;
    int max_cycles = 5;
};

void add_common_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--k", o.k, "palette size (quantized colors)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--lambda", o.lambda, "pairwise smoothing strength")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--gamma", o.gamma,
                    "edge weight falloff; a number or 'auto' (contrast-adaptive)")
        ->capture_default_str();
    cmd->add_option("--connectivity", o.connectivity,
                    "lattice neighborhood: 4|8 (2D), 6|18|26 (3D); 0 = smallest")
        ->check(CLI::IsMember({0, 4, 8, 6, 18, 26}))
        ->capture_default_str();
    cmd->add_option("--samples", o.samples, "k-means sample count M")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--restarts", o.restarts, "k-means++ restarts")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "RNG seed (env " + std::string(kSeedEnv) + ")")
        ->each([&o](const std::string&) { o.seed_given = true; });
    cmd->add_option("--n", o.n, "target region count N");
    cmd->add_flag("--no-size-constraint", o.no_size_constraint,
                  "plain connected components (s+ = S, s- = 0)");
    cmd->add_flag("--no-unary-size-weight", o.no_unary_size_weight,
                  "do not scale unary terms by region size on region graphs");
    cmd->add_option("--max-cycles", o.max_cycles, "expansion sweep limit")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

std::uint64_t env_seed() {
    if (const char* v = std::getenv(kSeedEnv)) {
        try {
            return std::stoull(v);
        } catch (const std::exception&) {
            throw sr::ConfigError(std::string(kSeedEnv) + " is not an integer");
        }
    }
    return 0;
}

sr::LevelConfig to_level_config(const CommonOpts& o) {
    sr::LevelConfig cfg;
    cfg.k = o.k;
    cfg.lambda = o.lambda;
    if (o.gamma != "auto") {
        try {
            cfg.gamma = std::stod(o.gamma);
        } catch (const std::exception&) {
            throw sr::ConfigError("--gamma must be a number or 'auto'");
        }
        if (*cfg.gamma < 0.0) throw sr::ConfigError("--gamma must be non-negative");
    }
    if (o.no_size_constraint && o.n) {
        throw sr::ConfigError("--n and --no-size-constraint are mutually exclusive");
    }
    if (o.n) cfg.n_target = *o.n;
    cfg.samples = o.samples;
    cfg.restarts = o.restarts;
    cfg.seed = o.seed_given ? o.seed : env_seed();
    cfg.size_weighted_unary = !o.no_unary_size_weight;
    cfg.max_cycles = o.max_cycles;
    return cfg;
}

// "k,lambda,n" with n = 0 meaning unconstrained.
sr::LevelConfig parse_level_triple(const std::string& spec, const sr::LevelConfig& base) {
    sr::LevelConfig cfg = base;
    cfg.n_target.reset();
    int k = 0;
    double lambda = 0.0;
    long long n = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(spec);
    if (!(ss >> k >> c1 >> lambda >> c2 >> n) || c1 != ',' || c2 != ',' ||
        !(ss >> std::ws).eof() || k < 1 || lambda < 0.0 || n < 0) {
        throw sr::ConfigError("--levels entry must be 'k,lambda,n' (n=0 for "
                              "unconstrained): got '" + spec + "'");
    }
    cfg.k = k;
    cfg.lambda = lambda;
    if (n > 0) cfg.n_target = n;
    return cfg;
}

json level_manifest(const sr::LevelConfig& cfg, const sr::LevelStats& stats,
                    const sr::Rag& rag) {
    json j;
    j["k"] = cfg.k;
    j["k_used"] = stats.k_used;
    j["lambda"] = cfg.lambda;
    j["gamma"] = cfg.gamma ? json(*cfg.gamma) : json("auto");
    j["gamma_used"] = stats.gamma_used;
    j["samples"] = cfg.samples;
    j["restarts"] = cfg.restarts;
    j["seed"] = cfg.seed;
    j["size_weighted_unary"] = cfg.size_weighted_unary;
    j["max_cycles"] = cfg.max_cycles;
    if (cfg.n_target) {
        j["n_target"] = *cfg.n_target;
    } else {
        j["n_target"] = nullptr;
    }
    sr::SizeBounds b = sr::SizeBounds::unconstrained();
    if (cfg.bounds) {
        b = *cfg.bounds;
    } else if (cfg.n_target) {
        b = sr::SizeBounds::from_target(
            *cfg.n_target, static_cast<std::int64_t>(rag.pixel_map.size()));
    }
    j["s_min"] = b.s_min;
    j["s_max"] = std::isfinite(b.s_max) ? json(b.s_max) : json("unconstrained");
    j["region_count"] = rag.regions.size();
    j["energy_init"] = stats.energy_init;
    j["energy_final"] = stats.energy_final;
    j["wall_ms"] = stats.wall_ms;
    return j;
}

void flatten_kv(const json& j, const std::string& prefix, std::ostream& out) {
    for (const auto& [key, value] : j.items()) {
        const std::string name = prefix.empty() ? key : prefix + "." + key;
        if (value.is_object()) {
            flatten_kv(value, name, out);
        } else if (value.is_null()) {
            out << name << "=\n";
        } else if (value.is_string()) {
            out << name << "=" << value.get<std::string>() << "\n";
        } else {
            out << name << "=" << value.dump() << "\n";
        }
    }
}

// Both manifest flavors: <path>.manifest (key=value) and <path>.manifest.json.
void write_manifest(const json& j, const fs::path& out_path) {
    const fs::path kv = out_path.string() + ".manifest";
    const fs::path js = out_path.string() + ".manifest.json";
    std::ofstream kvf(kv);
    if (!kvf) throw sr::IoError("cannot write " + kv.string());
    flatten_kv(j, "", kvf);
    std::ofstream jsf(js);
    if (!jsf) throw sr::IoError("cannot write " + js.string());
    jsf << j.dump(2) << "\n";
}

double wall_ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
}

int cmd_segment(const std::string& input, const std::string& output,
                const std::string& overlay, const std::string& boundary_map,
                const CommonOpts& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    const sr::RgbImage rgb = sr::read_image(input);
    const sr::LabImage lab = sr::rgb_to_lab_normalized(rgb);

    const sr::LevelConfig cfg = to_level_config(opts);
    const sr::HierarchyResult res =
        sr::run_hierarchy(lab, std::span<const sr::LevelConfig>(&cfg, 1),
                          opts.connectivity);
    const sr::Rag& rag = res.levels[0];

    sr::write_label_map(rag, output);
    if (!overlay.empty()) sr::write_overlay(rgb, rag.pixel_map, overlay, false);
    if (!boundary_map.empty()) {
        sr::write_overlay(rgb, rag.pixel_map, boundary_map, true);
    }

    json j = level_manifest(cfg, res.stats[0], rag);
    j["command"] = "segment";
    j["input"] = input;
    j["output"] = output;
    j["width"] = rag.width;
    j["height"] = rag.height;
    j["depth"] = rag.depth;
    j["connectivity"] = opts.connectivity == 0 ? (rag.depth > 1 ? 6 : 4)
                                               : opts.connectivity;
    j["total_wall_ms"] = wall_ms_since(t0);
    write_manifest(j, output);

    std::cout << "regions=" << rag.regions.size()
              << " energy=" << res.stats[0].energy_final
              << " wall_ms=" << j["total_wall_ms"].get<double>() << "\n";
    return 0;
}

int cmd_hierarchy(const std::string& input, const std::string& outdir,
                  const std::vector<std::string>& level_specs,
                  const CommonOpts& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    const sr::RgbImage rgb = sr::read_image(input);
    const sr::LabImage lab = sr::rgb_to_lab_normalized(rgb);

    std::vector<sr::LevelConfig> configs;
    configs.push_back(to_level_config(opts));
    for (const std::string& spec : level_specs) {
        sr::LevelConfig cfg = parse_level_triple(spec, configs.front());
        cfg.seed = configs.front().seed + configs.size();
        configs.push_back(cfg);
    }

    const sr::HierarchyResult res = sr::run_hierarchy(lab, configs, opts.connectivity);

    fs::create_directories(outdir);
    for (std::size_t i = 0; i < res.levels.size(); ++i) {
        const sr::Rag& rag = res.levels[i];
        // Volumes become directories of slices, so they get no extension.
        const std::string name = "level_" + std::to_string(i + 1) +
                                 (rgb.depth > 1 ? "" : ".png");
        const fs::path map_path = fs::path(outdir) / name;
        sr::write_label_map(rag, map_path);

        json j = level_manifest(res.configs[i], res.stats[i], rag);
        j["command"] = "hierarchy";
        j["level"] = i + 1;
        j["input"] = input;
        j["output"] = map_path.string();
        j["width"] = rag.width;
        j["height"] = rag.height;
        j["depth"] = rag.depth;
        j["connectivity"] = opts.connectivity == 0 ? (rag.depth > 1 ? 6 : 4)
                                                   : opts.connectivity;
        j["total_wall_ms"] = wall_ms_since(t0);
        write_manifest(j, map_path);
        std::cout << "level=" << (i + 1) << " regions=" << rag.regions.size()
                  << "\n";
    }
    return 0;
}

int cmd_coarsen(const std::string& labels_path, const std::string& image_path,
                const std::string& output, const CommonOpts& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    const sr::RgbImage rgb = sr::read_image(image_path);
    const sr::LabImage lab = sr::rgb_to_lab_normalized(rgb);
    const sr::LabelMap map = sr::read_label_map(labels_path);
    if (map.width != rgb.width || map.height != rgb.height ||
        map.depth != rgb.depth) {
        throw sr::ConfigError("label map dimensions do not match the image");
    }

    const sr::Rag prev = sr::ingest_label_map(map.ids, lab, opts.connectivity);

    sr::LevelConfig cfg = to_level_config(opts);
    cfg.seed += 1;  // matches the level-2 seed of `hierarchy`
    sr::LevelStats stats;
    const sr::Rag rag = sr::run_level(prev, cfg, &stats);

    sr::write_label_map(rag, output);

    json j = level_manifest(cfg, stats, rag);
    j["command"] = "coarsen";
    j["input_labels"] = labels_path;
    j["input_image"] = image_path;
    j["output"] = output;
    j["input_regions"] = prev.regions.size();
    j["width"] = rag.width;
    j["height"] = rag.height;
    j["depth"] = rag.depth;
    j["total_wall_ms"] = wall_ms_since(t0);
    write_manifest(j, output);

    std::cout << "regions_in=" << prev.regions.size()
              << " regions_out=" << rag.regions.size() << "\n";
    return 0;
}

int cmd_eval(const std::string& seg_path, const std::vector<std::string>& gt_paths,
             int tol) {
    const sr::LabelMap seg = sr::read_label_map(seg_path);
    if (seg.depth != 1) throw sr::ConfigError("eval supports 2D label maps only");

    std::vector<std::vector<std::int32_t>> gts;
    for (const std::string& p : gt_paths) {
        sr::LabelMap gt = sr::read_label_map(p);
        if (gt.width != seg.width || gt.height != seg.height || gt.depth != 1) {
            throw sr::ConfigError("ground truth dimensions do not match: " + p);
        }
        gts.push_back(std::move(gt.ids));
    }

    const sr::MetricReport rep =
        sr::evaluate(seg.ids, gts, seg.width, seg.height, tol);

    std::cout << "metric        mean";
    for (std::size_t i = 0; i < gts.size(); ++i) std::cout << "      gt" << i;
    std::cout << "\n";
    const auto row = [&](const char* name, double mean,
                         const std::vector<double>& per) {
        std::cout << name << "  " << mean;
        for (double v : per) std::cout << "  " << v;
        std::cout << "\n";
    };
    row("br ", rep.br, rep.per_gt_br);
    row("cue", rep.cue, rep.per_gt_cue);
    row("asa", rep.asa, rep.per_gt_asa);
    std::cout << "regions " << rep.region_count << "\n";

    std::cout << "br=" << rep.br << "\n"
              << "cue=" << rep.cue << "\n"
              << "asa=" << rep.asa << "\n"
              << "region_count=" << rep.region_count << "\n";
    for (std::size_t i = 0; i < gts.size(); ++i) {
        std::cout << "gt" << i << ".br=" << rep.per_gt_br[i] << "\n"
                  << "gt" << i << ".cue=" << rep.per_gt_cue[i] << "\n"
                  << "gt" << i << ".asa=" << rep.per_gt_asa[i] << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical piecewise-constant super-region segmentation"};
    app.require_subcommand(1);

    CommonOpts seg_opts, hier_opts, coarse_opts;
    std::string input, output, overlay, bmap, labels_path, image_path, outdir;
    std::vector<std::string> level_specs, gt_paths;
    std::string seg_path;
    int tol = 2;

    CLI::App* seg = app.add_subcommand(
        "segment", "segment an image into N superpixels (or supervoxels)");
    seg->add_option("input", input, "PNG/PPM image, or a directory of slices")
        ->required();
    seg->add_option("-o,--output", output, "label map output (.png or .csv)")
        ->required();
    seg->add_option("--overlay", overlay, "write an RGB overlay with boundaries");
    seg->add_option("--boundary-map", bmap, "write a black/white boundary map");
    add_common_flags(seg, seg_opts);

    CLI::App* hier = app.add_subcommand(
        "hierarchy", "run several hierarchy levels, one label map per level");
    hier->add_option("input", input, "PNG/PPM image, or a directory of slices")
        ->required();
    hier->add_option("-o,--output", outdir, "output directory")->required();
    hier->add_option("--levels", level_specs,
                     "additional level as 'k,lambda,n' (repeatable; n=0 for "
                     "unconstrained)");
    add_common_flags(hier, hier_opts);

    CLI::App* coarse = app.add_subcommand(
        "coarsen", "apply one hierarchy level over an existing label map");
    coarse->add_option("labels", labels_path, "input label map (.png/.csv)")
        ->required();
    coarse->add_option("image", image_path, "the image the labels belong to")
        ->required();
    coarse->add_option("-o,--output", output, "label map output")->required();
    add_common_flags(coarse, coarse_opts);

    CLI::App* ev = app.add_subcommand("eval", "score a segmentation against "
                                              "ground-truth label maps");
    ev->add_option("seg", seg_path, "segmentation label map")->required();
    ev->add_option("gt", gt_paths, "ground-truth label map(s)")->required();
    ev->add_option("--tol", tol, "boundary recall tolerance in pixels")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (seg->parsed()) return cmd_segment(input, output, overlay, bmap, seg_opts);
        if (hier->parsed()) return cmd_hierarchy(input, outdir, level_specs, hier_opts);
        if (coarse->parsed()) {
            return cmd_coarsen(labels_path, image_path, output, coarse_opts);
        }
        if (ev->parsed()) return cmd_eval(seg_path, gt_paths, tol);
    } catch (const sr::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const sr::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
