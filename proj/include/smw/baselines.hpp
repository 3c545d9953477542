#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "smw/detail/disjoint_sets.hpp"
#include "smw/error.hpp"
#include "smw/exact.hpp"
#include "smw/graph.hpp"
#include "smw/grid.hpp"
#include "smw/metrics.hpp"
#include "smw/semantic_mutex_watershed.hpp"
#include "smw/tensor.hpp"

namespace smw {

/// Mutex watershed on the internal edges, then each cluster takes the label of
/// its strongest semantic edge (ties: lowest label, then lowest edge id). That
/// edge is the only active semantic edge of the cluster; clusters without
/// semantic edges stay unlabeled.
inline SegmentationResult mws_max(const ExtendedGraph& g, const SmwOptions& options = {}) {
    std::vector<EdgeSpec> internal;
    std::vector<EdgeId> original;
    for (const Edge& e : g.edges()) {
        if (e.is_semantic()) continue;
        internal.push_back(e.spec());
        original.push_back(e.id);
    }
    const SegmentationResult partition = run_smw(build_graph(g.num_nodes(), 0, internal));

    SegmentationResult out;
    out.node_cluster = partition.node_cluster;
    out.cluster_labels.assign(partition.num_clusters(), kUnlabeled);
    out.active.assign(g.num_edges(), false);
    for (std::size_t i = 0; i < original.size(); ++i) out.active[original[i]] = partition.active[i];

    std::vector<const Edge*> best(partition.num_clusters(), nullptr);
    for (const Edge& e : g.edges()) {
        if (!e.is_semantic()) continue;
        const Edge*& b = best[out.node_cluster[e.u]];
        if (!b || e.weight > b->weight || (e.weight == b->weight && e.label() < b->label())) b = &e;
    }
    for (std::size_t c = 0; c < best.size(); ++c) {
        if (!best[c]) continue;
        out.cluster_labels[c] = best[c]->label();
        out.active[best[c]->id] = true;
    }

    const EdgeOrder order = sort_edges(g);
    for (EdgeId e : order.permutation)
        if (out.active[e]) out.energy += g.edge(e).weight;
    if (options.exact_energy) {
        const auto ranks = order.ranks();
        std::vector<std::uint64_t> positions;
        for (EdgeId e = 0; e < g.num_edges(); ++e)
            if (out.active[e]) positions.push_back(ranks[e]);
        out.exact_energy = sum_of_powers_of_two(positions);
    }
    return out;
}

namespace detail {

inline std::vector<std::int32_t> argmax_classes(const DenseTensor<float>& semantic) {
    if (semantic.rank() < 2 || semantic.dim(0) == 0)
        throw Error(ErrorCode::ShapeMismatch, "semantic tensor needs at least one class channel and a grid");
    const std::size_t k = semantic.dim(0), n = semantic.size() / k;
    std::vector<std::int32_t> best(n, 0);
    for (std::size_t c = 1; c < k; ++c) {
        const auto ch = semantic.channel(c);
        for (std::size_t p = 0; p < n; ++p)
            if (ch[p] > semantic.channel(best[p])[p]) best[p] = static_cast<std::int32_t>(c);
    }
    return best;
}

/// Instances numbered 1, 2, ... within each class by first pixel of each component.
inline PanopticLabelMap components_to_label_map(std::vector<std::size_t> shape, DisjointSets& sets,
                                                const std::vector<std::int32_t>& component_class_of_pixel) {
    PanopticLabelMap out(std::move(shape));
    std::uint32_t count = 0;
    const auto comp = sets.component_ids(&count);
    std::vector<std::int32_t> instance(count, 0);
    std::map<std::int32_t, std::int32_t> next;
    for (std::size_t p = 0; p < out.size(); ++p) {
        const std::int32_t c = component_class_of_pixel[p];
        if (instance[comp[p]] == 0) instance[comp[p]] = ++next[c];
        out.class_ids[p] = c;
        out.instance_ids[p] = instance[comp[p]];
    }
    return out;
}

} // namespace detail

/// Connected components of the per-pixel argmax class (ties: lowest class)
/// under the given connectivity. Every class, thing or stuff, yields one
/// segment per component.
inline PanopticLabelMap cc_semantic(const DenseTensor<float>& semantic, const OffsetPattern& connectivity) {
    const auto cls = detail::argmax_classes(semantic);
    const GridGeometry grid(semantic.trailing_shape());
    if (!connectivity.empty() && connectivity.dims() != grid.dims())
        throw Error(ErrorCode::ShapeMismatch, "connectivity offsets do not match the grid");
    detail::DisjointSets sets(grid.size());
    for (const Offset& o : connectivity)
        grid.for_each_pair(o.delta, [&](std::size_t p, std::size_t q) {
            if (cls[p] == cls[q]) sets.unite(static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(q));
        });
    return detail::components_to_label_map(grid.shape(), sets, cls);
}

/// Connected components over attractive-polarity offsets whose affinity is at
/// least `threshold`; each component takes the most frequent argmax class of
/// its pixels (ties: lowest class).
inline PanopticLabelMap cc_affinity(const DenseTensor<float>& affinities, const OffsetPattern& pattern,
                                    double threshold, const DenseTensor<float>& semantic) {
    check_threshold(threshold);
    const GridGeometry grid = detail::checked_geometry(affinities, pattern, &semantic);
    const auto cls = detail::argmax_classes(semantic);
    const std::size_t k = semantic.dim(0);

    detail::DisjointSets sets(grid.size());
    for (std::size_t c = 0; c < pattern.size(); ++c) {
        if (pattern[c].polarity != Polarity::Attractive) continue;
        const auto a = affinities.channel(c);
        grid.for_each_pair(pattern[c].delta, [&](std::size_t p, std::size_t q) {
            if (a[p] >= threshold) sets.unite(static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(q));
        });
    }
    std::uint32_t count = 0;
    const auto comp = sets.component_ids(&count);
    std::vector<std::uint32_t> votes(static_cast<std::size_t>(count) * k, 0);
    for (std::size_t p = 0; p < grid.size(); ++p) ++votes[comp[p] * k + static_cast<std::size_t>(cls[p])];
    std::vector<std::int32_t> winner(count, 0);
    for (std::uint32_t c = 0; c < count; ++c)
        for (std::size_t l = 1; l < k; ++l)
            if (votes[c * k + l] > votes[c * k + static_cast<std::size_t>(winner[c])]) winner[c] = static_cast<std::int32_t>(l);
    std::vector<std::int32_t> pixel_class(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) pixel_class[p] = winner[comp[p]];
    return detail::components_to_label_map(grid.shape(), sets, pixel_class);
}

} // namespace smw
