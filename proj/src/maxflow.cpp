#include "sr/maxflow.hpp"

#include <algorithm>
#include <limits>

namespace sr {

MaxFlowGraph::MaxFlowGraph(std::size_t node_count, std::size_t edge_hint) {
    nodes_.resize(node_count);
    arcs_.reserve(edge_hint * 2);
}

void MaxFlowGraph::reset(std::size_t node_count) {
    nodes_.assign(node_count, Node{});
    arcs_.clear();
    active_.clear();
    orphans_.clear();
    time_ = 0;
    flow_ = 0.0;
}

void MaxFlowGraph::add_terminal(std::uint32_t node, double cap_source,
                                double cap_sink) {
    // Fold into the node's net terminal residual; the saturated common part
    // of the merged (source, sink) pair is flow that needs no augmenting.
    const double t = nodes_[node].tr_cap;
    flow_ += std::min(cap_source + std::max(t, 0.0), cap_sink + std::max(-t, 0.0));
    nodes_[node].tr_cap = t + cap_source - cap_sink;
}

void MaxFlowGraph::add_edge(std::uint32_t p, std::uint32_t q, double cap_pq,
                            double cap_qp) {
    const std::int32_t a = static_cast<std::int32_t>(arcs_.size());
    arcs_.push_back({q, nodes_[p].first, cap_pq});
    arcs_.push_back({p, nodes_[q].first, cap_qp});
    nodes_[p].first = a;
    nodes_[q].first = a + 1;
}

void MaxFlowGraph::activate(std::uint32_t v) {
    if (!nodes_[v].active) {
        nodes_[v].active = true;
        active_.push_back(v);
    }
}

void MaxFlowGraph::make_orphan(std::uint32_t v, bool front) {
    nodes_[v].parent = kOrphan;
    if (front) {
        orphans_.push_front(v);
    } else {
        orphans_.push_back(v);
    }
}

// Residual of the arc in the direction flow would take through the tree:
// toward the node in the source tree, away from it in the sink tree.
double MaxFlowGraph::tree_residual(const Node& n, std::int32_t arc) const {
    return n.tree == Tree::kSource ? arcs_[arc ^ 1].rcap : arcs_[arc].rcap;
}

double MaxFlowGraph::solve() {
    for (std::uint32_t v = 0; v < nodes_.size(); ++v) {
        Node& n = nodes_[v];
        if (n.tr_cap > 0.0) {
            n.tree = Tree::kSource;
            n.parent = kTerminal;
            n.dist = 1;
            activate(v);
        } else if (n.tr_cap < 0.0) {
            n.tree = Tree::kSink;
            n.parent = kTerminal;
            n.dist = 1;
            activate(v);
        }
    }

    while (!active_.empty()) {
        const std::uint32_t i = active_.front();
        active_.pop_front();
        nodes_[i].active = false;
        if (nodes_[i].tree == Tree::kFree) continue;
        ++time_;

        std::int32_t boundary = kNoParent;
        for (std::int32_t a = nodes_[i].first; a >= 0; a = arcs_[a].next) {
            // Growth pushes flow outward: away from source-tree nodes,
            // toward sink-tree nodes.
            const double res = nodes_[i].tree == Tree::kSource
                                   ? arcs_[a].rcap
                                   : arcs_[a ^ 1].rcap;
            if (res <= 0.0) continue;
            const std::uint32_t j = arcs_[a].head;
            Node& nj = nodes_[j];
            if (nj.tree == Tree::kFree) {
                nj.tree = nodes_[i].tree;
                nj.parent = a ^ 1;  // arc j -> i
                nj.ts = nodes_[i].ts;
                nj.dist = nodes_[i].dist + 1;
                activate(j);
            } else if (nj.tree != nodes_[i].tree) {
                boundary = nodes_[i].tree == Tree::kSource ? a : (a ^ 1);
                break;
            }
        }

        if (boundary >= 0) {
            activate(i);  // come back to finish growing this node
            augment(boundary);
            adopt();
        }
    }

    return flow_;
}

void MaxFlowGraph::augment(std::int32_t boundary_arc) {
    // boundary_arc points from a source-tree node to a sink-tree node.
    const std::uint32_t src_end = arcs_[boundary_arc ^ 1].head;
    const std::uint32_t snk_end = arcs_[boundary_arc].head;

    // Bottleneck over boundary arc, both tree paths and both terminal caps;
    // remember the roots before any orphaning invalidates parents.
    double bottleneck = arcs_[boundary_arc].rcap;
    std::uint32_t src_root = src_end;
    while (nodes_[src_root].parent != kTerminal) {
        const std::int32_t pa = nodes_[src_root].parent;
        bottleneck = std::min(bottleneck, arcs_[pa ^ 1].rcap);
        src_root = arcs_[pa].head;
    }
    bottleneck = std::min(bottleneck, nodes_[src_root].tr_cap);

    std::uint32_t snk_root = snk_end;
    while (nodes_[snk_root].parent != kTerminal) {
        const std::int32_t pa = nodes_[snk_root].parent;
        bottleneck = std::min(bottleneck, arcs_[pa].rcap);
        snk_root = arcs_[pa].head;
    }
    bottleneck = std::min(bottleneck, -nodes_[snk_root].tr_cap);

    arcs_[boundary_arc].rcap -= bottleneck;
    arcs_[boundary_arc ^ 1].rcap += bottleneck;

    for (std::uint32_t v = src_end; nodes_[v].parent != kTerminal;) {
        const std::int32_t pa = nodes_[v].parent;
        arcs_[pa].rcap += bottleneck;
        arcs_[pa ^ 1].rcap -= bottleneck;
        const std::uint32_t next = arcs_[pa].head;
        if (arcs_[pa ^ 1].rcap <= 0.0) make_orphan(v, true);
        v = next;
    }
    nodes_[src_root].tr_cap -= bottleneck;
    if (nodes_[src_root].tr_cap <= 0.0) make_orphan(src_root, true);

    for (std::uint32_t v = snk_end; nodes_[v].parent != kTerminal;) {
        const std::int32_t pa = nodes_[v].parent;
        arcs_[pa ^ 1].rcap += bottleneck;
        arcs_[pa].rcap -= bottleneck;
        const std::uint32_t next = arcs_[pa].head;
        if (arcs_[pa].rcap <= 0.0) make_orphan(v, true);
        v = next;
    }
    nodes_[snk_root].tr_cap += bottleneck;
    if (nodes_[snk_root].tr_cap >= 0.0) make_orphan(snk_root, true);

    flow_ += bottleneck;
}

void MaxFlowGraph::adopt() {
    while (!orphans_.empty()) {
        const std::uint32_t v = orphans_.front();
        orphans_.pop_front();
        Node& nv = nodes_[v];
        if (nv.parent != kOrphan) continue;
        const Tree t = nv.tree;

        // Look for a new parent: same tree, residual toward v, rooted at a
        // terminal. Distances are cached with timestamps to avoid rewalking.
        std::int32_t best_arc = kNoParent;
        std::uint32_t best_dist = std::numeric_limits<std::uint32_t>::max();
        for (std::int32_t a = nv.first; a >= 0; a = arcs_[a].next) {
            const std::uint32_t j = arcs_[a].head;
            if (nodes_[j].tree != t) continue;
            if (tree_residual(nv, a) <= 0.0) continue;

            std::uint32_t d = 0;
            std::uint32_t u = j;
            bool rooted = false;
            while (true) {
                if (nodes_[u].ts == time_) {
                    d += nodes_[u].dist;
                    rooted = true;
                    break;
                }
                const std::int32_t pa = nodes_[u].parent;
                if (pa == kTerminal) {
                    nodes_[u].ts = time_;
                    nodes_[u].dist = 1;
                    d += 1;
                    rooted = true;
                    break;
                }
                if (pa == kOrphan || pa == kNoParent) break;
                ++d;
                u = arcs_[pa].head;
            }
            if (!rooted) continue;

            // Cache distances along the walked prefix.
            std::uint32_t dd = d;
            for (std::uint32_t x = j; x != u; x = arcs_[nodes_[x].parent].head) {
                nodes_[x].ts = time_;
                nodes_[x].dist = dd--;
            }
            if (d < best_dist) {
                best_dist = d;
                best_arc = a;
            }
        }

        if (best_arc >= 0) {
            nv.parent = best_arc;
            nv.ts = time_;
            nv.dist = best_dist + 1;
            continue;
        }

        // No parent found: v leaves the tree; its children become orphans and
        // potential re-entry points are reactivated.
        for (std::int32_t a = nv.first; a >= 0; a = arcs_[a].next) {
            const std::uint32_t j = arcs_[a].head;
            if (nodes_[j].tree != t) continue;
            if (tree_residual(nv, a) > 0.0) activate(j);
            const std::int32_t pj = nodes_[j].parent;
            if (pj >= 0 && arcs_[pj].head == v) make_orphan(j, true);
        }
        nv.tree = Tree::kFree;
        nv.parent = kNoParent;
    }
}

bool MaxFlowGraph::source_side(std::uint32_t node) const {
    return nodes_[node].tree == Tree::kSource;
}

}  // namespace sr
