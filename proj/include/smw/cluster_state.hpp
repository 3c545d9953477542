#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smw/detail/huge_pages.hpp"
#include "smw/error.hpp"
#include "smw/graph.hpp"

namespace smw {

/// Union-find forest over internal nodes with a root-level mutex table and
/// one optional label per cluster.
///
/// Mutex partners are stored per root and always refer to current roots: when
/// a root is absorbed, every partner entry naming it is re-keyed to the
/// surviving root. The forest uses union by size and path compression, and
/// partner lists are merged into the longer one.
class ClusterState {
public:
    ClusterState() = default;

    explicit ClusterState(std::size_t num_nodes) : nodes_(num_nodes) {
        for (NodeId i = 0; i < num_nodes; ++i) nodes_[i].parent = i;
    }

    std::size_t num_nodes() const noexcept { return nodes_.size(); }

    NodeId find(NodeId i) {
        NodeId root = i;
        while (nodes_[root].parent != root) root = nodes_[root].parent;
        while (nodes_[i].parent != root) {
            const NodeId next = nodes_[i].parent;
            nodes_[i].parent = root;
            i = next;
        }
        return root;
    }

    /// Root lookup without path compression.
    NodeId find_root(NodeId i) const {
        while (nodes_[i].parent != i) i = nodes_[i].parent;
        return i;
    }

    bool connected(NodeId i, NodeId j) { return find(i) == find(j); }

    bool mutex(NodeId i, NodeId j) { return roots_mutex(find(i), find(j)); }

    LabelId class_of(NodeId i) { return nodes_[find(i)].label; }

    void merge(NodeId i, NodeId j) {
        NodeId a = find(i);
        NodeId b = find(j);
        if (a == b) return;
        if (roots_mutex(a, b))
            throw Error(ErrorCode::MutexViolation, "nodes " + std::to_string(i) + " and " + std::to_string(j));
        if (!compatible(nodes_[a].label, nodes_[b].label))
            throw Error(ErrorCode::LabelConflict, "clusters labeled " + std::to_string(nodes_[a].label) + " and " +
                                                      std::to_string(nodes_[b].label));
        merge_roots(a, b);
    }

    void add_mutex(NodeId i, NodeId j) {
        const NodeId a = find(i);
        const NodeId b = find(j);
        if (a == b)
            throw Error(ErrorCode::AlreadyConnected, "nodes " + std::to_string(i) + " and " + std::to_string(j));
        insert_mutex_roots(a, b);
    }

    void assign_class(NodeId i, LabelId l) {
        const NodeId r = find(i);
        if (nodes_[r].label != kUnlabeled && nodes_[r].label != l)
            throw Error(ErrorCode::LabelConflict, "node " + std::to_string(i) + " already labeled " +
                                                      std::to_string(nodes_[r].label) + ", got " + std::to_string(l));
        nodes_[r].label = l;
    }

    static bool compatible(LabelId a, LabelId b) noexcept { return a == kUnlabeled || b == kUnlabeled || a == b; }

    // Root-level primitives used by the watershed driver, which already holds roots.

    bool roots_mutex(NodeId a, NodeId b) const {
        const Node& na = nodes_[a];
        const Node& nb = nodes_[b];
        if (na.count == 0 || nb.count == 0) return false;
        return na.count <= nb.count ? contains(partners(na), b) : contains(partners(nb), a);
    }

    LabelId root_label(NodeId r) const { return nodes_[r].label; }
    void set_root_label(NodeId r, LabelId l) { nodes_[r].label = l; }

    void insert_mutex_roots(NodeId a, NodeId b) {
        if (contains(partners(nodes_[a]), b)) return;
        push_partner(nodes_[a], b);
        push_partner(nodes_[b], a);
    }

    /// Unions two distinct roots, returns the surviving root.
    NodeId merge_roots(NodeId a, NodeId b) {
        if (nodes_[a].size < nodes_[b].size) std::swap(a, b);
        // a survives, b is absorbed
        Node& na = nodes_[a];
        Node& nb = nodes_[b];
        nb.parent = a;
        na.size += nb.size;
        if (na.label == kUnlabeled) na.label = nb.label;
        nb.label = kUnlabeled;
        if (nb.count == 0) return a;

        for (NodeId p : partners(nb)) {
            Node& np = nodes_[p];
            const auto list = partners(np);
            const auto at = static_cast<std::size_t>(std::find(list.begin(), list.end(), b) - list.begin());
            if (contains(list, a))
                erase_partner(np, at);
            else
                list[at] = a;
        }
        if (nb.count > na.count) swap_partners(na, nb);
        for (NodeId p : partners(nb))
            if (!contains(partners(na), p)) push_partner(na, p);
        release_partners(nb);
        return a;
    }

    /// Number of unordered root pairs in the mutex table.
    std::size_t num_mutex_pairs() const {
        std::size_t twice = 0;
        for (const Node& n : nodes_) twice += n.count;
        return twice / 2;
    }

    /// Unordered root pairs (smaller root first), unsorted.
    std::vector<std::pair<NodeId, NodeId>> mutex_pairs() const {
        std::vector<std::pair<NodeId, NodeId>> out;
        for (NodeId a = 0; a < nodes_.size(); ++a)
            for (NodeId b : partners(nodes_[a]))
                if (a < b) out.emplace_back(a, b);
        return out;
    }

    bool is_root(NodeId i) const { return nodes_[i].parent == i; }

    /// Cache hints for an upcoming find(i): the node itself, or its current parent.
    void prefetch(NodeId i) const { __builtin_prefetch(&nodes_[i]); }
    void prefetch_parent(NodeId i) const { __builtin_prefetch(&nodes_[nodes_[i].parent]); }

private:
    static constexpr std::uint32_t kInline = 4;

    // One 32-byte record per node. Up to kInline partners live in the record,
    // longer lists in overflow_[slot].
    struct Node {
        NodeId parent = 0;
        std::uint32_t size = 1;
        LabelId label = kUnlabeled;
        std::uint32_t count = 0;
        union {
            std::array<NodeId, kInline> local;
            std::uint32_t slot;
        };

        Node() : local{} {}
    };
    static_assert(sizeof(Node) == 32);

    static bool contains(std::span<const NodeId> list, NodeId x) {
        return std::find(list.begin(), list.end(), x) != list.end();
    }

    std::span<NodeId> partners(Node& n) {
        if (n.count <= kInline) return {n.local.data(), n.count};
        return overflow_[n.slot];
    }

    std::span<const NodeId> partners(const Node& n) const {
        if (n.count <= kInline) return {n.local.data(), n.count};
        return overflow_[n.slot];
    }

    void push_partner(Node& n, NodeId x) {
        if (n.count < kInline) {
            n.local[n.count++] = x;
            return;
        }
        if (n.count == kInline) {
            std::uint32_t slot;
            if (free_slots_.empty()) {
                slot = static_cast<std::uint32_t>(overflow_.size());
                overflow_.emplace_back();
            } else {
                slot = free_slots_.back();
                free_slots_.pop_back();
            }
            overflow_[slot].assign(n.local.begin(), n.local.end());
            n.slot = slot;
        }
        overflow_[n.slot].push_back(x);
        ++n.count;
    }

    void erase_partner(Node& n, std::size_t at) {
        if (n.count <= kInline) {
            n.local[at] = n.local[--n.count];
            return;
        }
        auto& list = overflow_[n.slot];
        list[at] = list.back();
        list.pop_back();
        if (--n.count == kInline) {
            const std::uint32_t slot = n.slot;
            std::copy(list.begin(), list.end(), n.local.begin());
            free_slot(slot);
        }
    }

    void swap_partners(Node& x, Node& y) {
        std::swap(x.count, y.count);
        std::swap(x.local, y.local);
    }

    void release_partners(Node& n) {
        if (n.count > kInline) free_slot(n.slot);
        n.count = 0;
    }

    void free_slot(std::uint32_t slot) {
        overflow_[slot].clear();
        free_slots_.push_back(slot);
    }

    detail::huge_vector<Node> nodes_;
    std::vector<std::vector<NodeId>> overflow_;
    std::vector<std::uint32_t> free_slots_;
};

} // namespace smw
