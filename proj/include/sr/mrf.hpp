#pragma once

#include <cstddef>
#include <vector>

#include "sr/gridgraph.hpp"
#include "sr/quantize.hpp"

namespace sr {

/// Palette index per graph node.
using Labeling = std::vector<int>;

/// Piecewise-constant labeling energy over a RegionGraph and a Palette:
///
///   E(l) = sum_p s_p * ||x_p - theta_{l_p}||^2_2
///        + lambda * sum_{(p,q)} w_pq * ||theta_{l_p} - theta_{l_q}||_1
///
/// The s_p factor keeps region-graph energies consistent with the pixel
/// energies they summarize; on pixel lattices all s_p = 1 and it is inert.
/// Unary and pairwise tables are precomputed at construction, and the
/// pairwise table is verified to be submodular for expansion moves.
class EnergyModel {
public:
    EnergyModel(const RegionGraph& graph, const Palette& palette,
                double lambda = 0.1, bool size_weighted_unary = true);

    /// ||x_p - theta_k||^2_2 (never size-scaled).
    double unary_cost(std::size_t p, int label) const {
        return unary_[p * k_ + label];
    }
    /// ||theta_a - theta_b||_1.
    double pairwise_cost(int a, int b) const { return pairwise_[a * k_ + b]; }

    double total_energy(const Labeling& l) const;
    Labeling nearest_center_labeling() const;

    const RegionGraph& graph() const { return *graph_; }
    const Palette& palette() const { return *palette_; }
    double lambda() const { return lambda_; }
    int label_count() const { return k_; }
    bool size_weighted() const { return size_weighted_; }
    double node_scale(std::size_t p) const {
        return size_weighted_ ? static_cast<double>(graph_->sizes[p]) : 1.0;
    }

private:
    const RegionGraph* graph_;
    const Palette* palette_;
    double lambda_;
    bool size_weighted_;
    int k_;
    std::vector<double> unary_;     // node_count x k
    std::vector<double> pairwise_;  // k x k
};

struct MinimizeOptions {
    int max_cycles = 5;
};

/// One alpha-expansion move: every node either keeps its label or switches to
/// alpha, solved exactly as an s-t min-cut of the binary move energy. The
/// returned labeling never has higher energy than l.
Labeling expansion_move(const EnergyModel& model, const Labeling& l, int alpha);

/// Sweeps alpha over all labels in ascending order until a full sweep brings
/// no energy decrease (or max_cycles sweeps), starting from init.
Labeling minimize(const EnergyModel& model, Labeling init,
                  const MinimizeOptions& opts = {});

/// minimize() from the pointwise nearest-center labeling.
Labeling minimize(const EnergyModel& model, const MinimizeOptions& opts = {});

}  // namespace sr
