#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "smw/graph.hpp"
#include "smw/rng.hpp"

namespace smw {

struct RandomGraphConfig {
    std::size_t min_nodes = 1;
    std::size_t max_nodes = 8;
    std::size_t min_labels = 0;
    std::size_t max_labels = 3;
    std::size_t max_edges = 18;
    /// Probability that the graph's weights are quantized to ten levels, which
    /// produces ties and exercises the id tie-break.
    double tie_probability = 0.25;
};

/// Small extended graph with uniformly drawn size, edge types and weights.
inline ExtendedGraph random_extended_graph(Rng& rng, const RandomGraphConfig& cfg = {}) {
    const auto n = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(cfg.min_nodes),
                                                        static_cast<std::int64_t>(cfg.max_nodes)));
    const auto k = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(cfg.min_labels),
                                                        static_cast<std::int64_t>(cfg.max_labels)));
    const auto m = static_cast<std::size_t>(rng.between(0, static_cast<std::int64_t>(cfg.max_edges)));
    const bool quantize = rng.chance(cfg.tie_probability);

    std::vector<EdgeSpec> edges;
    edges.reserve(m);
    while (edges.size() < m) {
        double w = rng.uniform();
        if (quantize) w = std::floor(w * 10.0) / 10.0;
        // semantic edges need a label, internal edges need two distinct nodes
        const std::uint64_t kinds = (k > 0 ? 1 : 0) + (n > 1 ? 2 : 0);
        if (kinds == 0) break;
        std::uint64_t pick = rng.below(3);
        if (k == 0) pick = 1 + rng.below(2);
        if (n < 2) pick = 0;
        if (pick == 0) {
            edges.push_back(semantic(static_cast<NodeId>(rng.below(n)), static_cast<LabelId>(rng.below(k)), w));
        } else {
            const auto u = static_cast<NodeId>(rng.below(n));
            auto v = static_cast<NodeId>(rng.below(n - 1));
            if (v >= u) ++v;
            edges.push_back(pick == 1 ? attractive(u, v, w) : repulsive(u, v, w));
        }
    }
    return build_graph(n, k, edges);
}

} // namespace smw
