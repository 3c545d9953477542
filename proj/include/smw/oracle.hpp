#pragma once

// Exact verification machinery for the semantic mutex watershed objective.
//
// Everything here is deliberately independent of SmwSolver/ClusterState: the
// checkers rebuild connectivity from scratch with a plain union-find, and the
// brute-force maximizer enumerates every subset of edges.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "smw/detail/disjoint_sets.hpp"
#include "smw/detail/threads.hpp"
#include "smw/error.hpp"
#include "smw/exact.hpp"
#include "smw/graph.hpp"
#include "smw/semantic_mutex_watershed.hpp"

namespace smw {

/// Per-edge weights 2^rank, rank counted from the weakest edge in sort_edges order.
struct ExactWeights {
    std::vector<ExactInteger> weights;

    /// Each weight exceeds the sum of all strictly smaller weights.
    bool is_dominant() const {
        std::vector<ExactInteger> sorted = weights;
        std::sort(sorted.begin(), sorted.end());
        ExactInteger below = 0;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (i > 0 && sorted[i] == sorted[i - 1]) return false;
            if (sorted[i] <= below) return false;
            below += sorted[i];
        }
        return true;
    }
};

inline ExactWeights dominant_weights(const ExtendedGraph& g) {
    const auto ranks = sort_edges(g).ranks();
    ExactWeights out;
    out.weights.reserve(ranks.size());
    for (std::uint32_t r : ranks) out.weights.push_back(power_of_two(r));
    return out;
}

/// Cut indicator per edge id (true = cut).
struct CutIndicators {
    std::vector<bool> cut;

    std::size_t size() const noexcept { return cut.size(); }
    bool operator[](std::size_t e) const { return cut[e]; }
    friend bool operator==(const CutIndicators&, const CutIndicators&) = default;
};

/// No active repulsive edge joins two nodes connected by active attractive
/// edges; equivalently no active cycle contains exactly one repulsive edge.
template <class Flags>
bool check_mutex_constraint(const ExtendedGraph& g, const Flags& active) {
    detail::DisjointSets sets(g.num_nodes());
    for (const Edge& e : g.edges())
        if (e.is_attractive() && active[e.id]) sets.unite(e.u, e.v());
    for (const Edge& e : g.edges())
        if (e.is_repulsive() && active[e.id] && sets.same(e.u, e.v())) return false;
    return true;
}

/// No two distinct terminals are joined by a path of active attractive and
/// semantic edges. Terminal t is vertex num_nodes + t.
template <class Flags>
bool check_label_constraint(const ExtendedGraph& g, const Flags& active) {
    const std::size_t n = g.num_nodes();
    detail::DisjointSets sets(n + g.num_labels());
    for (const Edge& e : g.edges()) {
        if (!active[e.id]) continue;
        if (e.is_attractive())
            sets.unite(e.u, e.v());
        else if (e.is_semantic())
            sets.unite(e.u, static_cast<std::uint32_t>(n + e.label()));
    }
    std::vector<bool> seen(n + g.num_labels(), false);
    for (std::size_t t = 0; t < g.num_labels(); ++t) {
        const std::uint32_t r = sets.find(static_cast<std::uint32_t>(n + t));
        if (seen[r]) return false;
        seen[r] = true;
    }
    return true;
}

template <class Flags>
bool is_feasible(const ExtendedGraph& g, const Flags& active) {
    return check_mutex_constraint(g, active) && check_label_constraint(g, active);
}

/// Partition and labeling induced by an active set: clusters are components of
/// active attractive edges, labels come from active semantic edges.
template <class Flags>
SegmentationResult induced_segmentation(const ExtendedGraph& g, const Flags& active) {
    detail::DisjointSets sets(g.num_nodes());
    for (const Edge& e : g.edges())
        if (e.is_attractive() && active[e.id]) sets.unite(e.u, e.v());
    std::uint32_t count = 0;
    SegmentationResult out;
    out.node_cluster = sets.component_ids(&count);
    out.cluster_labels.assign(count, kUnlabeled);
    out.active.assign(g.num_edges(), false);
    for (const Edge& e : g.edges()) {
        if (!active[e.id]) continue;
        out.active[e.id] = true;
        out.energy += e.weight;
        if (!e.is_semantic()) continue;
        LabelId& l = out.cluster_labels[out.node_cluster[e.u]];
        if (l != kUnlabeled && l != e.label())
            throw Error(ErrorCode::LabelConflict, "active set assigns two labels to one cluster");
        l = e.label();
    }
    return out;
}

inline constexpr std::size_t kOracleEdgeLimit = 18;

struct OracleSolution {
    std::vector<bool> active;
    ExactInteger energy = 0;
    std::uint64_t feasible_subsets = 0;
};

namespace detail {

struct MaskFlags {
    std::uint64_t mask;
    bool operator[](std::size_t e) const noexcept { return (mask >> e) & 1u; }
};

} // namespace detail

/// Maximizes the dominant-power energy over every subset of edges that passes
/// both constraint checkers. Distinct powers of two make the maximizer unique,
/// so the parallel split over the subset index space cannot change the answer.
inline OracleSolution brute_force_optimum(const ExtendedGraph& g, std::size_t max_edges = kOracleEdgeLimit) {
    const std::size_t m = g.num_edges();
    if (m > max_edges || m > 62)
        throw Error(ErrorCode::TooLargeForOracle,
                    std::to_string(m) + " edges exceeds the enumeration cap of " + std::to_string(max_edges));
    const auto ranks = sort_edges(g).ranks();
    std::vector<std::uint64_t> weight(m);
    for (std::size_t e = 0; e < m; ++e) weight[e] = std::uint64_t{1} << ranks[e];

    const std::uint64_t total = std::uint64_t{1} << m;
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(detail::thread_count(), total));

    struct Best {
        std::uint64_t value = 0;
        std::uint64_t mask = 0;
        std::uint64_t feasible = 0;
    };
    std::vector<Best> best(workers);
    auto scan = [&](unsigned w) {
        const std::uint64_t lo = total * w / workers;
        const std::uint64_t hi = total * (w + 1) / workers;
        Best b;
        for (std::uint64_t mask = lo; mask < hi; ++mask) {
            if (!is_feasible(g, detail::MaskFlags{mask})) continue;
            ++b.feasible;
            std::uint64_t value = 0;
            for (std::size_t e = 0; e < m; ++e)
                if ((mask >> e) & 1u) value += weight[e];
            if (value >= b.value) {
                b.value = value;
                b.mask = mask;
            }
        }
        best[w] = b;
    };
    if (workers == 1) {
        scan(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(scan, w);
    }

    Best top;
    for (const Best& b : best) {
        top.feasible += b.feasible;
        if (b.value >= top.value) {
            top.value = b.value;
            top.mask = b.mask;
        }
    }
    OracleSolution out;
    out.active.resize(m);
    for (std::size_t e = 0; e < m; ++e) out.active[e] = (top.mask >> e) & 1u;
    out.energy = ExactInteger(top.value);
    out.feasible_subsets = top.feasible;
    return out;
}

/// y_e = a_e for repulsive edges, 1 - a_e for attractive and semantic edges.
template <class Flags>
CutIndicators active_to_cut(const ExtendedGraph& g, const Flags& active) {
    CutIndicators y;
    y.cut.resize(g.num_edges());
    for (const Edge& e : g.edges()) y.cut[e.id] = e.is_repulsive() ? bool(active[e.id]) : !bool(active[e.id]);
    return y;
}

/// Graph with one semantic edge per (node, label) pair plus matching cut indicators.
struct DensifiedCut {
    ExtendedGraph graph;
    CutIndicators y;
};

/// Completes a segmentation to the dense terminal model: missing (node, label)
/// pairs become weight-0 semantic edges appended after the original ids.
/// Internal edges take their indicators from active_to_cut; every semantic
/// edge is uncut exactly when its label is the node's cluster label, so
/// redundant or missing semantic activations are normalized away. Nodes of
/// unlabeled clusters keep every terminal edge cut.
inline DensifiedCut densify_cut(const ExtendedGraph& g, const SegmentationResult& seg) {
    const std::size_t n = g.num_nodes();
    const std::size_t k = g.num_labels();
    std::vector<EdgeSpec> specs;
    specs.reserve(g.num_edges() + n * k);
    std::vector<bool> present(n * k, false);
    for (const Edge& e : g.edges()) {
        specs.push_back(e.spec());
        if (e.is_semantic()) present[e.u * k + static_cast<std::size_t>(e.label())] = true;
    }
    for (NodeId i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l)
            if (!present[i * k + l]) specs.push_back(semantic(i, static_cast<LabelId>(l), 0.0));

    DensifiedCut out;
    out.graph = build_graph(n, k, specs);
    const CutIndicators internal = active_to_cut(g, seg.active);
    out.y.cut.resize(out.graph.num_edges());
    for (const Edge& e : out.graph.edges()) {
        if (e.is_semantic())
            out.y.cut[e.id] = seg.node_label(e.u) != e.label();
        else
            out.y.cut[e.id] = internal[e.id];
    }
    return out;
}

struct PolytopeOptions {
    /// Nodes with no uncut terminal edge (unlabeled clusters of a sparse
    /// input) are counted in `exempted_nodes` instead of failing the
    /// unique-assignment family.
    bool exempt_unassigned = true;
};

struct PolytopeReport {
    /// Cycle inequalities anchored at cut attractive edges.
    bool cycle_attractive = true;
    /// Cycle inequalities anchored at cut repulsive edges.
    bool cycle_repulsive = true;
    /// Exactly one uncut terminal edge per node.
    bool unique_assignment = true;
    /// Uncut internal edges join nodes with identical uncut terminals.
    bool terminal_consistency = true;
    std::size_t exempted_nodes = 0;

    bool feasible() const noexcept {
        return cycle_attractive && cycle_repulsive && unique_assignment && terminal_consistency;
    }
};

/// Checks cut indicators against the symmetric multiway cut polytope.
///
/// Cycle inequalities hold over all cycles iff no cut internal edge has both
/// endpoints in one component of the uncut internal edges, which is what is
/// checked. (node, label) pairs without a semantic edge count as cut; among
/// parallel semantic edges the pair is uncut if any of them is. A graph
/// without labels has no terminal constraints.
inline PolytopeReport check_smwc_polytope(const ExtendedGraph& g, const CutIndicators& y,
                                          const PolytopeOptions& options = {}) {
    if (y.size() != g.num_edges())
        throw Error(ErrorCode::ShapeMismatch, "cut indicators do not match the edge count");
    PolytopeReport report;
    const std::size_t n = g.num_nodes();
    const std::size_t k = g.num_labels();

    detail::DisjointSets sets(n);
    for (const Edge& e : g.edges())
        if (e.is_internal() && !y[e.id]) sets.unite(e.u, e.v());
    for (const Edge& e : g.edges()) {
        if (!e.is_internal() || !y[e.id] || !sets.same(e.u, e.v())) continue;
        (e.is_attractive() ? report.cycle_attractive : report.cycle_repulsive) = false;
    }

    if (k == 0) return report;

    std::vector<bool> uncut(n * k, false);
    for (const Edge& e : g.edges())
        if (e.is_semantic() && !y[e.id]) uncut[e.u * k + static_cast<std::size_t>(e.label())] = true;
    for (std::size_t i = 0; i < n; ++i) {
        const auto count = std::count(uncut.begin() + static_cast<std::ptrdiff_t>(i * k),
                                      uncut.begin() + static_cast<std::ptrdiff_t>((i + 1) * k), true);
        if (count == 1) continue;
        if (count == 0 && options.exempt_unassigned)
            ++report.exempted_nodes;
        else
            report.unique_assignment = false;
    }
    for (const Edge& e : g.edges()) {
        if (!e.is_internal() || y[e.id]) continue;
        for (std::size_t t = 0; t < k; ++t)
            if (uncut[e.u * k + t] != uncut[e.v() * k + t]) report.terminal_consistency = false;
    }
    return report;
}

template <class Number>
struct EnergyIdentity {
    /// Sum of weights over active edges.
    Number activeside{};
    /// Cut form: weights of cut attractive and semantic edges minus weights of cut repulsive edges.
    Number cutside{};
    /// Sum of weights over attractive and semantic edges.
    Number constant{};
};

/// Evaluates the objective in active-set form and, separately, in cut form
/// over active_to_cut(active), using dominant weights 2^rank. Throws
/// InconsistentTransform unless cutside == constant - activeside exactly.
template <class Flags>
EnergyIdentity<ExactInteger> energy_equivalence_exact(const ExtendedGraph& g, const Flags& active) {
    const ExactWeights w = dominant_weights(g);
    const CutIndicators y = active_to_cut(g, active);
    EnergyIdentity<ExactInteger> out;
    for (const Edge& e : g.edges()) {
        if (active[e.id]) out.activeside += w.weights[e.id];
        if (e.is_repulsive()) {
            if (y[e.id]) out.cutside -= w.weights[e.id];
        } else {
            out.constant += w.weights[e.id];
            if (y[e.id]) out.cutside += w.weights[e.id];
        }
    }
    if (out.cutside != out.constant - out.activeside)
        throw Error(ErrorCode::InconsistentTransform, "cut-form energy " + out.cutside.str() +
                                                          " != constant - active-form energy " +
                                                          ExactInteger(out.constant - out.activeside).str());
    return out;
}

/// Same identity with the raw weights, to 1e-9 relative tolerance.
template <class Flags>
EnergyIdentity<double> energy_equivalence_float(const ExtendedGraph& g, const Flags& active) {
    const CutIndicators y = active_to_cut(g, active);
    EnergyIdentity<double> out;
    for (const Edge& e : g.edges()) {
        if (active[e.id]) out.activeside += e.weight;
        if (e.is_repulsive()) {
            if (y[e.id]) out.cutside -= e.weight;
        } else {
            out.constant += e.weight;
            if (y[e.id]) out.cutside += e.weight;
        }
    }
    const double expected = out.constant - out.activeside;
    const double scale = std::max({1.0, std::abs(out.constant), std::abs(out.activeside)});
    if (std::abs(out.cutside - expected) > 1e-9 * scale)
        throw Error(ErrorCode::InconsistentTransform,
                    "cut-form energy " + std::to_string(out.cutside) + " != " + std::to_string(expected));
    return out;
}

} // namespace smw
