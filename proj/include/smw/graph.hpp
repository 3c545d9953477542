#pragma once

#include <algorithm>
#include <cmath>
#include <bit>
#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smw/detail/huge_pages.hpp"
#include "smw/error.hpp"

namespace smw {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;
using LabelId = std::int32_t;

/// Label of a cluster that never accepted a semantic edge.
inline constexpr LabelId kUnlabeled = -1;

enum class EdgeType : std::uint8_t { Attractive, Repulsive, Semantic };

constexpr char type_tag(EdgeType t) noexcept {
    switch (t) {
    case EdgeType::Attractive: return 'A';
    case EdgeType::Repulsive: return 'R';
    case EdgeType::Semantic: return 'S';
    }
    return '?';
}

/// Edge as supplied to build_graph. For semantic edges `second` is the label id.
struct EdgeSpec {
    NodeId u = 0;
    std::uint32_t second = 0;
    EdgeType type = EdgeType::Attractive;
    double weight = 0.0;

    friend bool operator==(const EdgeSpec&, const EdgeSpec&) = default;
};

inline EdgeSpec attractive(NodeId u, NodeId v, double w) { return {u, v, EdgeType::Attractive, w}; }
inline EdgeSpec repulsive(NodeId u, NodeId v, double w) { return {u, v, EdgeType::Repulsive, w}; }
inline EdgeSpec semantic(NodeId u, LabelId l, double w) {
    return {u, static_cast<std::uint32_t>(l), EdgeType::Semantic, w};
}

struct Edge {
    NodeId u = 0;
    std::uint32_t second = 0;
    EdgeId id = 0;
    EdgeType type = EdgeType::Attractive;
    double weight = 0.0;

    bool is_attractive() const noexcept { return type == EdgeType::Attractive; }
    bool is_repulsive() const noexcept { return type == EdgeType::Repulsive; }
    bool is_semantic() const noexcept { return type == EdgeType::Semantic; }
    bool is_internal() const noexcept { return type != EdgeType::Semantic; }

    /// Second internal endpoint; meaningless for semantic edges.
    NodeId v() const noexcept { return second; }
    /// Terminal label; meaningful for semantic edges only.
    LabelId label() const noexcept { return static_cast<LabelId>(second); }

    EdgeSpec spec() const noexcept { return {u, second, type, weight}; }

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Internal nodes plus one terminal per label, joined by typed, non-negative weighted edges.
/// Immutable once built; edge ids are the positions in edges().
class ExtendedGraph {
public:
    ExtendedGraph() = default;

    std::size_t num_nodes() const noexcept { return num_nodes_; }
    std::size_t num_labels() const noexcept { return num_labels_; }
    std::size_t num_edges() const noexcept { return edges_.size(); }
    std::span<const Edge> edges() const noexcept { return edges_; }
    const Edge& edge(EdgeId e) const { return edges_[e]; }

    friend bool operator==(const ExtendedGraph&, const ExtendedGraph&) = default;

    friend ExtendedGraph build_graph(std::size_t, std::size_t, std::span<const EdgeSpec>);

private:
    std::size_t num_nodes_ = 0;
    std::size_t num_labels_ = 0;
    std::vector<Edge> edges_;
};

/// Validates the edge list and assigns ids in input order.
inline ExtendedGraph build_graph(std::size_t num_nodes, std::size_t num_labels,
                                 std::span<const EdgeSpec> edges) {
    ExtendedGraph g;
    g.num_nodes_ = num_nodes;
    g.num_labels_ = num_labels;
    g.edges_.reserve(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const EdgeSpec& s = edges[i];
        const auto where = [i] { return "edge " + std::to_string(i); };
        if (!std::isfinite(s.weight) || s.weight < 0.0)
            throw Error(ErrorCode::NegativeOrNonFiniteWeight, where() + " has weight " + std::to_string(s.weight));
        if (s.u >= num_nodes)
            throw Error(ErrorCode::OutOfRangeEndpoint, where() + " endpoint " + std::to_string(s.u));
        if (s.type == EdgeType::Semantic) {
            if (s.second >= num_labels)
                throw Error(ErrorCode::LabelOutOfRange, where() + " label " + std::to_string(s.second));
        } else {
            if (s.second >= num_nodes)
                throw Error(ErrorCode::OutOfRangeEndpoint, where() + " endpoint " + std::to_string(s.second));
            if (s.second == s.u)
                throw Error(ErrorCode::OutOfRangeEndpoint, where() + " is a self-loop on node " + std::to_string(s.u));
        }
        // -0.0 would otherwise sort differently from +0.0 under a bitwise key
        const double w = s.weight == 0.0 ? 0.0 : s.weight;
        g.edges_.push_back(Edge{s.u, s.second, static_cast<EdgeId>(i), s.type, w});
    }
    return g;
}

inline ExtendedGraph build_graph(std::size_t num_nodes, std::size_t num_labels,
                                 const std::vector<EdgeSpec>& edges) {
    return build_graph(num_nodes, num_labels, std::span<const EdgeSpec>(edges));
}

inline ExtendedGraph build_graph(std::size_t num_nodes, std::size_t num_labels,
                                 std::initializer_list<EdgeSpec> edges) {
    return build_graph(num_nodes, num_labels, std::span<const EdgeSpec>(edges.begin(), edges.size()));
}

/// Same graph with every semantic edge removed (edge ids are renumbered).
inline ExtendedGraph strip_semantic(const ExtendedGraph& g) {
    std::vector<EdgeSpec> kept;
    kept.reserve(g.num_edges());
    for (const Edge& e : g.edges())
        if (e.is_internal()) kept.push_back(e.spec());
    return build_graph(g.num_nodes(), g.num_labels(), kept);
}

/// Processing order: weight strictly descending, ties by ascending edge id.
struct EdgeOrder {
    std::vector<EdgeId> permutation;

    std::size_t size() const noexcept { return permutation.size(); }
    EdgeId operator[](std::size_t i) const { return permutation[i]; }

    /// rank[e] = 0 for the weakest edge up to |E|-1 for the strongest.
    std::vector<std::uint32_t> ranks() const {
        std::vector<std::uint32_t> r(permutation.size());
        const std::size_t n = permutation.size();
        for (std::size_t pos = 0; pos < n; ++pos)
            r[permutation[pos]] = static_cast<std::uint32_t>(n - 1 - pos);
        return r;
    }
};

namespace detail {

// Maps a non-negative finite double to a key whose ascending unsigned order is
// descending weight order.
inline std::uint64_t descending_key(double w) noexcept {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(w));
    std::memcpy(&bits, &w, sizeof(bits));
    return ~bits;
}

} // namespace detail

namespace detail {

inline std::uint64_t edge_key(const Edge& e) noexcept { return descending_key(e.weight); }

// Bits in which the keys of [first, last) differ.
inline std::uint64_t varying_bits(const Edge* first, const Edge* last) {
    std::uint64_t varying = 0;
    const std::uint64_t k0 = edge_key(*first);
    for (; first != last; ++first) varying |= edge_key(*first) ^ k0;
    return varying;
}

// Stable counting scatter of [src, src + n) into dst by key bits [shift, shift + bits).
// Returns bucket start offsets (size 2^bits + 1).
inline std::vector<std::size_t> scatter_by_digit(const Edge* src, Edge* dst, std::size_t n, int shift, int bits) {
    const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
    std::vector<std::size_t> start((std::size_t{1} << bits) + 1, 0);
    for (std::size_t i = 0; i < n; ++i) ++start[((edge_key(src[i]) >> shift) & mask) + 1];
    for (std::size_t d = 1; d < start.size(); ++d) start[d] += start[d - 1];
    std::vector<std::size_t> next(start.begin(), start.end() - 1);
    for (std::size_t i = 0; i < n; ++i) dst[next[(edge_key(src[i]) >> shift) & mask]++] = src[i];
    return start;
}

inline constexpr int kRadixBits = 11;
// Ranges up to this many edges are finished with LSD passes (about L2-sized).
inline constexpr std::size_t kCacheEdges = std::size_t{1} << 15;

// Stable radix sort by ascending key. Ranges above kCacheEdges are split on
// their top varying digit; smaller ranges are finished with LSD passes over
// their varying bits. sort_in_place leaves the result in `a`, sort_into in
// `dst`; the other buffer is clobbered.
inline void sort_into(Edge* src, Edge* dst, std::size_t n);

inline void sort_in_place(Edge* a, Edge* spare, std::size_t n) {
    if (n < 2) return;
    if (n <= 32) {
        std::stable_sort(a, a + n, [](const Edge& x, const Edge& y) { return edge_key(x) < edge_key(y); });
        return;
    }
    const std::uint64_t varying = varying_bits(a, a + n);
    if (varying == 0) return;
    const int low = std::countr_zero(varying);
    const int high = 64 - std::countl_zero(varying);
    if (n > kCacheEdges) {
        const int bits = std::min(kRadixBits, high - low);
        const auto start = scatter_by_digit(a, spare, n, high - bits, bits);
        for (std::size_t d = 0; d + 1 < start.size(); ++d)
            sort_into(spare + start[d], a + start[d], start[d + 1] - start[d]);
        return;
    }
    const int passes = (high - low + kRadixBits - 1) / kRadixBits;
    const int bits = (high - low + passes - 1) / passes;
    Edge* from = a;
    Edge* to = spare;
    for (int shift = low; shift < high; shift += bits) {
        scatter_by_digit(from, to, n, shift, std::min(bits, high - shift));
        std::swap(from, to);
    }
    if (from != a) std::copy(from, from + n, a);
}

inline void sort_into(Edge* src, Edge* dst, std::size_t n) {
    if (n <= kCacheEdges) {
        std::copy(src, src + n, dst);
        sort_in_place(dst, src, n);
        return;
    }
    const std::uint64_t varying = varying_bits(src, src + n);
    if (varying == 0) {
        std::copy(src, src + n, dst);
        return;
    }
    const int low = std::countr_zero(varying);
    const int high = 64 - std::countl_zero(varying);
    const int bits = std::min(kRadixBits, high - low);
    const auto start = scatter_by_digit(src, dst, n, high - bits, bits);
    for (std::size_t d = 0; d + 1 < start.size(); ++d)
        sort_in_place(dst + start[d], src + start[d], start[d + 1] - start[d]);
}

} // namespace detail

/// Edges in processing order: weight descending, ties by ascending id.
inline detail::UninitBuffer<Edge> sorted_edges(const ExtendedGraph& g) {
    const auto edges = g.edges();
    const std::size_t n = edges.size();
    detail::UninitBuffer<Edge> out(n), spare(n);
    if (n <= detail::kCacheEdges) {
        std::copy(edges.begin(), edges.end(), out.begin());
        detail::sort_in_place(out.data(), spare.data(), n);
        return out;
    }
    const std::uint64_t varying = detail::varying_bits(edges.data(), edges.data() + n);
    if (varying == 0) {
        std::copy(edges.begin(), edges.end(), out.begin());
        return out;
    }
    const int low = std::countr_zero(varying);
    const int high = 64 - std::countl_zero(varying);
    const int bits = std::min(detail::kRadixBits, high - low);
    const auto start = detail::scatter_by_digit(edges.data(), out.data(), n, high - bits, bits);
    for (std::size_t d = 0; d + 1 < start.size(); ++d)
        detail::sort_in_place(out.data() + start[d], spare.data() + start[d], start[d + 1] - start[d]);
    return out;
}

inline EdgeOrder sort_edges(const ExtendedGraph& g) {
    EdgeOrder order;
    const auto sorted = sorted_edges(g);
    order.permutation.reserve(sorted.size());
    for (const Edge& e : sorted) order.permutation.push_back(e.id);
    return order;
}

} // namespace smw
