#include "sr/mrf.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sr/errors.hpp"
#include "sr/maxflow.hpp"
#include "sr/vecmath.hpp"

namespace sr {

namespace {

// Slack for float assembly of the L1 sums; a genuine violation is a bug in
// the pairwise table, not rounding.
constexpr double kSubmodularEps = 1e-9;

void check_expansion_submodular(const std::vector<double>& pw, int k) {
    for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
            if (pw[a * k + a] + pw[b * k + b] >
                pw[a * k + b] + pw[b * k + a] + kSubmodularEps) {
                throw std::invalid_argument("pairwise table is not submodular");
            }
        }
    }
    // Expansion moves additionally need the triangle inequality so every
    // binary move energy stays submodular.
    if (k > 256) return;
    for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
            for (int c = 0; c < k; ++c) {
                if (pw[a * k + b] >
                    pw[a * k + c] + pw[c * k + b] + kSubmodularEps) {
                    throw std::invalid_argument(
                        "pairwise table violates the triangle inequality");
                }
            }
        }
    }
}

}  // namespace

EnergyModel::EnergyModel(const RegionGraph& graph, const Palette& palette,
                         double lambda, bool size_weighted_unary)
    : graph_(&graph),
      palette_(&palette),
      lambda_(lambda),
      size_weighted_(size_weighted_unary),
      k_(palette.k) {
    if (lambda < 0.0) throw ConfigError("lambda must be non-negative");
    if (k_ < 1) throw ConfigError("palette is empty");
    if (graph.feature_dim != palette.dim) {
        throw ConfigError("graph and palette feature dimensions differ");
    }

    unary_.resize(graph.node_count * k_);
    for (std::size_t p = 0; p < graph.node_count; ++p) {
        const auto x = graph.feature(p);
        for (int c = 0; c < k_; ++c) {
            unary_[p * k_ + c] = squared_l2(x, palette.center(c));
        }
    }
    pairwise_.resize(static_cast<std::size_t>(k_) * k_);
    for (int a = 0; a < k_; ++a) {
        for (int b = 0; b < k_; ++b) {
            pairwise_[a * k_ + b] = l1_distance(palette.center(a), palette.center(b));
        }
    }
    check_expansion_submodular(pairwise_, k_);
}

double EnergyModel::total_energy(const Labeling& l) const {
    if (l.size() != graph_->node_count) {
        throw ConfigError("labeling size does not match the graph");
    }
    double e = 0.0;
    for (std::size_t p = 0; p < graph_->node_count; ++p) {
        e += node_scale(p) * unary_cost(p, l[p]);
    }
    double pair = 0.0;
    for (std::size_t i = 0; i < graph_->edges.size(); ++i) {
        const auto [p, q] = graph_->edges[i];
        pair += graph_->weights[i] * pairwise_cost(l[p], l[q]);
    }
    return e + lambda_ * pair;
}

Labeling EnergyModel::nearest_center_labeling() const {
    Labeling l(graph_->node_count);
    for (std::size_t p = 0; p < graph_->node_count; ++p) {
        int best = 0;
        double best_d = unary_cost(p, 0);
        for (int c = 1; c < k_; ++c) {
            const double d = unary_cost(p, c);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        l[p] = best;
    }
    return l;
}

namespace {

// Binary move energy in the reduced form: constants drop, linear terms fold
// into the terminal capacities, and the submodular interaction
// (B + C - A - D) y_p'(1-...) becomes an n-link paid when p keeps its label
// while q expands.
Labeling solve_move(const EnergyModel& model, const Labeling& l, int alpha,
                    MaxFlowGraph& flow) {
    const RegionGraph& g = model.graph();
    const std::size_t n = g.node_count;
    const double lambda = model.lambda();

    flow.reset(n);

    // cap_source pays when the node expands to alpha (sink side),
    // cap_sink when it keeps its label (source side).
    std::vector<double> take_alpha(n), keep(n);
    for (std::size_t p = 0; p < n; ++p) {
        const double s = model.node_scale(p);
        keep[p] = s * model.unary_cost(p, l[p]);
        take_alpha[p] = s * model.unary_cost(p, alpha);
    }

    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const auto [p, q] = g.edges[i];
        const double c = lambda * g.weights[i];
        if (c == 0.0) continue;
        const double a = c * model.pairwise_cost(l[p], l[q]);
        const double b = c * model.pairwise_cost(l[p], alpha);
        const double cc = c * model.pairwise_cost(alpha, l[q]);
        // d = c * pairwise(alpha, alpha) = 0
        take_alpha[p] += cc - a;
        take_alpha[q] += -cc;
        double ncap = b + cc - a;
        if (ncap < 0.0) {
            if (ncap < -1e-9) {
                throw std::logic_error("non-submodular expansion move");
            }
            ncap = 0.0;
        }
        if (ncap > 0.0) {
            flow.add_edge(p, q, ncap, 0.0);
        }
    }

    for (std::size_t p = 0; p < n; ++p) {
        flow.add_terminal(static_cast<std::uint32_t>(p), take_alpha[p], keep[p]);
    }
    flow.solve();

    Labeling result(n);
    for (std::size_t p = 0; p < n; ++p) {
        result[p] = flow.source_side(static_cast<std::uint32_t>(p)) ? l[p] : alpha;
    }
    return result;
}

}  // namespace

Labeling expansion_move(const EnergyModel& model, const Labeling& l, int alpha) {
    if (alpha < 0 || alpha >= model.label_count()) {
        throw ConfigError("alpha outside the palette");
    }
    MaxFlowGraph flow(model.graph().node_count, model.graph().edges.size());
    Labeling moved = solve_move(model, l, alpha, flow);
    // The cut is optimal for the move energy; guard the non-increase contract
    // against capacity rounding anyway.
    if (model.total_energy(moved) > model.total_energy(l)) return l;
    return moved;
}

Labeling minimize(const EnergyModel& model, Labeling init,
                  const MinimizeOptions& opts) {
    if (init.size() != model.graph().node_count) {
        throw ConfigError("initial labeling size does not match the graph");
    }
    for (int v : init) {
        if (v < 0 || v >= model.label_count()) {
            throw ConfigError("initial labeling references labels outside the palette");
        }
    }

    MaxFlowGraph flow(model.graph().node_count, model.graph().edges.size());
    Labeling current = std::move(init);
    double energy = model.total_energy(current);

    for (int cycle = 0; cycle < opts.max_cycles; ++cycle) {
        bool improved = false;
        for (int alpha = 0; alpha < model.label_count(); ++alpha) {
            Labeling moved = solve_move(model, current, alpha, flow);
            const double moved_energy = model.total_energy(moved);
            if (moved_energy < energy) {
                current = std::move(moved);
                energy = moved_energy;
                improved = true;
            }
        }
        if (!improved) break;
    }
    return current;
}

Labeling minimize(const EnergyModel& model, const MinimizeOptions& opts) {
    return minimize(model, model.nearest_center_labeling(), opts);
}

}  // namespace sr
