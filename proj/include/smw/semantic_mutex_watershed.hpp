#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "smw/cluster_state.hpp"
#include "smw/error.hpp"
#include "smw/exact.hpp"
#include "smw/graph.hpp"

namespace smw {

/// Partition, labeling and active edge set produced by a watershed run.
struct SegmentationResult {
    /// Cluster id per node; ids are 0-based and assigned by first occurrence in node order.
    std::vector<std::uint32_t> node_cluster;
    /// Label per cluster id, kUnlabeled when the cluster holds no active semantic edge.
    std::vector<LabelId> cluster_labels;
    /// Activation flag per edge id.
    std::vector<bool> active;
    /// Sum of raw weights over active edges, accumulated in processing order.
    double energy = 0.0;
    /// Sum of 2^rank over active edges; present only when requested.
    std::optional<ExactInteger> exact_energy;

    std::size_t num_clusters() const noexcept { return cluster_labels.size(); }

    LabelId node_label(NodeId i) const { return cluster_labels[node_cluster[i]]; }

    /// Partition and labeling agree (active flags and energies ignored).
    bool same_segmentation(const SegmentationResult& other) const {
        return node_cluster == other.node_cluster && cluster_labels == other.cluster_labels;
    }

    friend bool operator==(const SegmentationResult&, const SegmentationResult&) = default;
};

struct SmwOptions {
    bool exact_energy = false;
};

/// Stepwise driver for the semantic mutex watershed.
///
/// Edges are visited in sort_edges order. An attractive edge merges its
/// endpoints unless their clusters are mutually exclusive or carry different
/// labels (an unlabeled cluster is compatible with any label). A repulsive
/// edge records a mutex unless its endpoints are already connected. A
/// semantic edge labels its node's cluster unless the cluster already carries
/// another label. Accepted edges are active even when redundant (attractive
/// inside a cluster, repeated mutex, repeated label).
class SmwSolver {
public:
    explicit SmwSolver(const ExtendedGraph& g)
        : state_(g.num_nodes()), active_(g.num_edges(), false), sorted_(sorted_edges(g)) {}

    SmwSolver(const ExtendedGraph& g, const EdgeOrder& order)
        : state_(g.num_nodes()), active_(g.num_edges(), false), sorted_(order.size()) {
        for (std::size_t i = 0; i < order.size(); ++i) sorted_[i] = g.edge(order[i]);
    }

    bool done() const noexcept { return position_ >= sorted_.size(); }
    std::size_t position() const noexcept { return position_; }
    EdgeOrder order() const {
        EdgeOrder out;
        out.permutation.reserve(sorted_.size());
        for (const Edge& e : sorted_) out.permutation.push_back(e.id);
        return out;
    }
    const ClusterState& state() const noexcept { return state_; }
    const std::vector<bool>& active() const noexcept { return active_; }

    /// Processes the next edge; returns whether it became active.
    bool step() {
        const Edge& e = sorted_[position_++];
        bool accept = false;
        switch (e.type) {
        case EdgeType::Attractive: {
            const NodeId a = state_.find(e.u);
            const NodeId b = state_.find(e.v());
            if (a == b) {
                accept = true;
            } else if (!state_.roots_mutex(a, b) &&
                       ClusterState::compatible(state_.root_label(a), state_.root_label(b))) {
                state_.merge_roots(a, b);
                accept = true;
            }
            break;
        }
        case EdgeType::Repulsive: {
            const NodeId a = state_.find(e.u);
            const NodeId b = state_.find(e.v());
            if (a != b) {
                state_.insert_mutex_roots(a, b);
                accept = true;
            }
            break;
        }
        case EdgeType::Semantic: {
            const NodeId r = state_.find(e.u);
            const LabelId current = state_.root_label(r);
            if (current == kUnlabeled || current == e.label()) {
                state_.set_root_label(r, e.label());
                accept = true;
            }
            break;
        }
        }
        if (accept) {
            active_[e.id] = true;
            energy_ += e.weight;
        }
        return accept;
    }

    void run_until(std::size_t position) {
        position = std::min(position, sorted_.size());
        // Node records of upcoming edges are requested early, their parents a bit later.
        constexpr std::size_t kNear = 8, kFar = 16;
        while (position_ < position) {
            if (position_ + kFar < position) {
                const Edge& far = sorted_[position_ + kFar];
                state_.prefetch(far.u);
                if (!far.is_semantic()) state_.prefetch(far.v());
                const Edge& near = sorted_[position_ + kNear];
                state_.prefetch_parent(near.u);
                if (!near.is_semantic()) state_.prefetch_parent(near.v());
            }
            step();
        }
    }

    void run() { run_until(sorted_.size()); }

    SegmentationResult result(const SmwOptions& options = {}) const {
        SegmentationResult out;
        const std::size_t n = state_.num_nodes();
        constexpr auto kNone = std::numeric_limits<std::uint32_t>::max();
        std::vector<std::uint32_t> root_cluster(n, kNone);
        out.node_cluster.resize(n);
        for (NodeId i = 0; i < n; ++i) {
            const NodeId r = state_.find_root(i);
            if (root_cluster[r] == kNone) {
                root_cluster[r] = static_cast<std::uint32_t>(out.cluster_labels.size());
                out.cluster_labels.push_back(state_.root_label(r));
            }
            out.node_cluster[i] = root_cluster[r];
        }
        out.active = active_;
        out.energy = energy_;
        if (options.exact_energy) {
            std::vector<std::uint64_t> ranks;
            const std::size_t m = sorted_.size();
            for (std::size_t pos = 0; pos < m; ++pos)
                if (active_[sorted_[pos].id]) ranks.push_back(m - 1 - pos);
            out.exact_energy = sum_of_powers_of_two(ranks);
        }
        return out;
    }

private:
    std::size_t position_ = 0;
    ClusterState state_;
    std::vector<bool> active_;
    double energy_ = 0.0;
    // edges in processing order, read sequentially
    detail::UninitBuffer<Edge> sorted_;
};

inline SegmentationResult run_smw(const ExtendedGraph& g, const SmwOptions& options = {}) {
    SmwSolver solver(g);
    solver.run();
    return solver.result(options);
}

/// Plain mutex watershed: the semantic variant restricted to at most one label.
inline SegmentationResult run_mws(const ExtendedGraph& g, const SmwOptions& options = {}) {
    if (g.num_labels() > 1)
        throw Error(ErrorCode::TooManyLabels, "mutex watershed accepts at most one label, graph has " +
                                                  std::to_string(g.num_labels()));
    return run_smw(g, options);
}

} // namespace smw
