#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <vector>

namespace sr {

/// s-t max-flow / min-cut on sparse graphs with double capacities.
///
/// Augmenting-path solver in the grow / augment / adopt style that works well
/// on lattice graphs: both search trees are kept alive between augmentations
/// and repaired through orphan adoption instead of being rebuilt.
class MaxFlowGraph {
public:
    explicit MaxFlowGraph(std::size_t node_count = 0, std::size_t edge_hint = 0);

    void reset(std::size_t node_count);

    /// Accumulates terminal capacities; callable repeatedly per node.
    void add_terminal(std::uint32_t node, double cap_source, double cap_sink);

    /// Residual arc pair p->q with cap_pq and q->p with cap_qp.
    void add_edge(std::uint32_t p, std::uint32_t q, double cap_pq, double cap_qp);

    /// Runs the solver and returns the max-flow (= min-cut) value.
    double solve();

    /// Valid after solve(). Nodes unreachable from either terminal count as
    /// sink side; either choice yields a minimum cut.
    bool source_side(std::uint32_t node) const;

private:
    enum class Tree : std::uint8_t { kFree, kSource, kSink };

    // parent is an arc index from the node to its parent, or one of:
    static constexpr std::int32_t kNoParent = -1;
    static constexpr std::int32_t kTerminal = -2;
    static constexpr std::int32_t kOrphan = -3;

    struct Arc {
        std::uint32_t head;
        std::int32_t next;
        double rcap;
    };
    struct Node {
        std::int32_t first = -1;
        std::int32_t parent = kNoParent;
        std::uint64_t ts = 0;
        std::uint32_t dist = 0;
        double tr_cap = 0.0;
        Tree tree = Tree::kFree;
        bool active = false;
    };

    void activate(std::uint32_t v);
    void make_orphan(std::uint32_t v, bool front);
    void augment(std::int32_t boundary_arc);
    void adopt();
    double tree_residual(const Node& n, std::int32_t arc) const;

    std::vector<Node> nodes_;
    std::vector<Arc> arcs_;
    std::deque<std::uint32_t> active_;
    std::deque<std::uint32_t> orphans_;
    std::uint64_t time_ = 0;
    double flow_ = 0.0;
};

}  // namespace sr
