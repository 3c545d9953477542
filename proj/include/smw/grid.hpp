#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smw/error.hpp"
#include "smw/graph.hpp"
#include "smw/rng.hpp"
#include "smw/tensor.hpp"

namespace smw {

enum class Polarity : std::uint8_t { Attractive, Repulsive };

struct Offset {
    std::vector<std::int64_t> delta;
    Polarity polarity = Polarity::Attractive;

    friend bool operator==(const Offset&, const Offset&) = default;
};

/// Neighbourhood stencil: one affinity channel per offset.
class OffsetPattern {
public:
    OffsetPattern() = default;

    explicit OffsetPattern(std::vector<Offset> offsets) {
        for (auto& o : offsets) add(std::move(o.delta), o.polarity);
    }

    void add(std::vector<std::int64_t> delta, Polarity polarity) {
        if (delta.empty()) throw Error(ErrorCode::ShapeMismatch, "offset has no components");
        if (!offsets_.empty() && delta.size() != dims())
            throw Error(ErrorCode::ShapeMismatch, "offset of dimension " + std::to_string(delta.size()) +
                                                      " in a " + std::to_string(dims()) + "-d pattern");
        if (std::all_of(delta.begin(), delta.end(), [](std::int64_t d) { return d == 0; }))
            throw Error(ErrorCode::ShapeMismatch, "zero offset");
        offsets_.push_back({std::move(delta), polarity});
    }

    std::size_t size() const noexcept { return offsets_.size(); }
    bool empty() const noexcept { return offsets_.empty(); }
    std::size_t dims() const noexcept { return offsets_.empty() ? 0 : offsets_.front().delta.size(); }
    const Offset& operator[](std::size_t i) const { return offsets_[i]; }
    auto begin() const noexcept { return offsets_.begin(); }
    auto end() const noexcept { return offsets_.end(); }

    friend bool operator==(const OffsetPattern&, const OffsetPattern&) = default;

private:
    std::vector<Offset> offsets_;
};

/// Row-major pixel indexing for an n-d grid.
class GridGeometry {
public:
    explicit GridGeometry(std::vector<std::size_t> shape) : shape_(std::move(shape)), strides_(shape_.size()) {
        if (shape_.empty()) throw Error(ErrorCode::ShapeMismatch, "grid needs at least one spatial axis");
        std::size_t s = 1;
        for (std::size_t d = shape_.size(); d-- > 0;) {
            if (shape_[d] == 0) throw Error(ErrorCode::ShapeMismatch, "zero-length grid axis");
            strides_[d] = s;
            s *= shape_[d];
        }
        size_ = s;
    }

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t dims() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return size_; }

    std::size_t flat(const std::vector<std::size_t>& coords) const {
        std::size_t p = 0;
        for (std::size_t d = 0; d < shape_.size(); ++d) p += coords[d] * strides_[d];
        return p;
    }

    std::vector<std::size_t> coords(std::size_t p) const {
        std::vector<std::size_t> c(shape_.size());
        for (std::size_t d = 0; d < shape_.size(); ++d) {
            c[d] = p / strides_[d];
            p %= strides_[d];
        }
        return c;
    }

    /// Calls fn(p, p + delta) for every pixel whose neighbour lies inside the
    /// grid, in row-major order of p.
    template <class Fn>
    void for_each_pair(const std::vector<std::int64_t>& delta, Fn&& fn) const {
        const std::size_t dims = shape_.size();
        std::vector<std::int64_t> lo(dims), hi(dims);
        std::int64_t shift = 0;
        for (std::size_t d = 0; d < dims; ++d) {
            const auto n = static_cast<std::int64_t>(shape_[d]);
            lo[d] = std::max<std::int64_t>(0, -delta[d]);
            hi[d] = std::min<std::int64_t>(n, n - delta[d]);
            if (lo[d] >= hi[d]) return;
            shift += delta[d] * static_cast<std::int64_t>(strides_[d]);
        }
        std::vector<std::int64_t> c(lo);
        const std::size_t last = dims - 1;
        while (true) {
            std::int64_t base = 0;
            for (std::size_t d = 0; d < last; ++d) base += c[d] * static_cast<std::int64_t>(strides_[d]);
            for (std::int64_t x = lo[last]; x < hi[last]; ++x) {
                const auto p = static_cast<std::size_t>(base + x);
                fn(p, static_cast<std::size_t>(static_cast<std::int64_t>(p) + shift));
            }
            std::size_t d = last;
            while (d > 0) {
                --d;
                if (++c[d] < hi[d]) break;
                c[d] = lo[d];
                if (d == 0) return;
            }
            if (last == 0) return;
        }
    }

    /// Number of in-bounds pairs for an offset.
    std::size_t pair_count(const std::vector<std::int64_t>& delta) const {
        std::size_t count = 1;
        for (std::size_t d = 0; d < shape_.size(); ++d) {
            const auto n = static_cast<std::int64_t>(shape_[d]);
            const std::int64_t span = n - std::abs(delta[d]);
            if (span <= 0) return 0;
            count *= static_cast<std::size_t>(span);
        }
        return count;
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

struct SplitWeight {
    EdgeType type = EdgeType::Attractive;
    double weight = 0.0;
};

inline void check_threshold(double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw Error(ErrorCode::BadThreshold, "threshold must lie in (0, 1), got " + std::to_string(threshold));
}

/// a >= t: attractive (a - t) / (1 - t); a < t: repulsive (t - a) / t.
inline SplitWeight split_affinity(double a, double threshold) {
    if (a >= threshold) return {EdgeType::Attractive, (a - threshold) / (1.0 - threshold)};
    return {EdgeType::Repulsive, (threshold - a) / threshold};
}

struct SplitAffinities {
    DenseTensor<double> weight;
    std::vector<bool> attractive;
};

inline SplitAffinities split_thresholded_affinities(const DenseTensor<float>& a, double threshold) {
    check_threshold(threshold);
    SplitAffinities out{DenseTensor<double>(a.shape()), std::vector<bool>(a.size())};
    for (std::size_t i = 0; i < a.size(); ++i) {
        const SplitWeight s = split_affinity(a[i], threshold);
        out.weight[i] = s.weight;
        out.attractive[i] = s.type == EdgeType::Attractive;
    }
    return out;
}

struct GridGraphOptions {
    /// Semantic edges with probability <= epsilon are not emitted.
    double semantic_epsilon = 0.0;
    /// When set, every affinity is split at this threshold and the offset
    /// polarity is ignored.
    std::optional<double> split_threshold;
};

namespace detail {

inline GridGeometry checked_geometry(const DenseTensor<float>& affinities, const OffsetPattern& pattern,
                                     const DenseTensor<float>* semantic) {
    if (affinities.rank() < 2) throw Error(ErrorCode::ShapeMismatch, "affinities need a channel axis and a grid");
    if (affinities.dim(0) != pattern.size())
        throw Error(ErrorCode::ShapeMismatch, std::to_string(affinities.dim(0)) + " affinity channels for " +
                                                  std::to_string(pattern.size()) + " offsets");
    GridGeometry grid(affinities.trailing_shape());
    if (!pattern.empty() && pattern.dims() != grid.dims())
        throw Error(ErrorCode::ShapeMismatch, std::to_string(pattern.dims()) + "-d offsets on a " +
                                                  std::to_string(grid.dims()) + "-d grid");
    if (semantic && semantic->trailing_shape() != grid.shape())
        throw Error(ErrorCode::ShapeMismatch, "semantic and affinity grids differ");
    return grid;
}

} // namespace detail

/// Pixel graph: node id = row-major pixel index. Internal edges come first,
/// offset-major then pixel order; semantic edges follow, class-major then pixel
/// order.
inline ExtendedGraph build_grid_graph(const DenseTensor<float>& affinities, const OffsetPattern& pattern,
                                      const DenseTensor<float>* semantic = nullptr,
                                      const GridGraphOptions& options = {}) {
    const GridGeometry grid = detail::checked_geometry(affinities, pattern, semantic);
    if (options.split_threshold) check_threshold(*options.split_threshold);
    if (semantic && semantic->rank() < 2) throw Error(ErrorCode::ShapeMismatch, "semantic tensor needs a class axis");
    const std::size_t num_labels = semantic ? semantic->dim(0) : 0;

    std::size_t expected = 0;
    for (const Offset& o : pattern) expected += grid.pair_count(o.delta);
    if (semantic) expected += semantic->size();
    std::vector<EdgeSpec> edges;
    edges.reserve(expected);

    for (std::size_t c = 0; c < pattern.size(); ++c) {
        const auto channel = affinities.channel(c);
        const Polarity polarity = pattern[c].polarity;
        grid.for_each_pair(pattern[c].delta, [&](std::size_t p, std::size_t q) {
            const double a = channel[p];
            const auto u = static_cast<NodeId>(p), v = static_cast<NodeId>(q);
            if (options.split_threshold) {
                const SplitWeight s = split_affinity(a, *options.split_threshold);
                edges.push_back({u, v, s.type, s.weight});
            } else if (polarity == Polarity::Attractive) {
                edges.push_back(attractive(u, v, a));
            } else {
                edges.push_back(repulsive(u, v, 1.0 - a));
            }
        });
    }
    if (semantic) {
        for (std::size_t k = 0; k < num_labels; ++k) {
            const auto probs = semantic->channel(k);
            for (std::size_t p = 0; p < probs.size(); ++p)
                if (probs[p] > options.semantic_epsilon)
                    edges.push_back(smw::semantic(static_cast<NodeId>(p), static_cast<LabelId>(k), probs[p]));
        }
    }
    return build_graph(grid.size(), num_labels, edges);
}

inline double stuff_affinity(const DenseTensor<float>& p, std::size_t i, std::size_t j) {
    return static_cast<double>(p[i]) * static_cast<double>(p[j]);
}

struct SoftMask {
    DenseTensor<float> probabilities;
    double score = 1.0;
    LabelId class_id = 0;
};

inline double mask_affinity(const SoftMask& m, std::size_t i, std::size_t j) {
    return m.score * static_cast<double>(m.probabilities[i]) * static_cast<double>(m.probabilities[j]);
}

struct SoftIou {
    double repulsion = 0.0;
    /// Both masks are empty; repulsion is reported as 0.
    bool both_empty = false;
};

/// 1 - sum(p_m p_n) / sum(max(p_m, p_n)).
inline SoftIou soft_iou_repulsion(const SoftMask& m, const SoftMask& n) {
    if (m.probabilities.shape() != n.probabilities.shape())
        throw Error(ErrorCode::ShapeMismatch, "masks live on different grids");
    double inter = 0.0, uni = 0.0;
    for (std::size_t i = 0; i < m.probabilities.size(); ++i) {
        const double a = m.probabilities[i], b = n.probabilities[i];
        inter += a * b;
        uni += std::max(a, b);
    }
    if (uni == 0.0) return {0.0, true};
    return {1.0 - inter / uni, false};
}

struct MaskEdgeOptions {
    std::size_t attractive_pairs_per_mask = 16;
    /// Multiplies every repulsive weight.
    double repulsion_scale = 1.0;
};

/// Sampled edges over the mask grid (node id = pixel index). Pixels are drawn
/// from each mask's support (probability > 0). For every mask, attractive
/// pairs weighted by mask_affinity; then for every mask pair (m < n),
/// `samples_per_pair` repulsive edges weighted by the pair's soft-IoU
/// repulsion. A sample that draws the same pixel twice is dropped.
inline std::vector<EdgeSpec> masks_to_edges(const std::vector<SoftMask>& masks, std::size_t samples_per_pair,
                                            std::uint64_t seed, const MaskEdgeOptions& options = {}) {
    std::vector<EdgeSpec> edges;
    if (masks.empty()) return edges;
    std::vector<std::vector<NodeId>> support(masks.size());
    for (std::size_t m = 0; m < masks.size(); ++m) {
        if (masks[m].probabilities.shape() != masks[0].probabilities.shape())
            throw Error(ErrorCode::ShapeMismatch, "masks live on different grids");
        const auto& p = masks[m].probabilities;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (p[i] > 0.0f) support[m].push_back(static_cast<NodeId>(i));
    }

    Rng rng(seed);
    for (std::size_t m = 0; m < masks.size(); ++m) {
        const auto& s = support[m];
        if (s.size() < 2) continue;
        for (std::size_t k = 0; k < options.attractive_pairs_per_mask; ++k) {
            const std::size_t a = rng.below(s.size());
            std::size_t b = rng.below(s.size() - 1);
            if (b >= a) ++b;
            edges.push_back(attractive(s[a], s[b], mask_affinity(masks[m], s[a], s[b])));
        }
    }
    for (std::size_t m = 0; m < masks.size(); ++m) {
        for (std::size_t n = m + 1; n < masks.size(); ++n) {
            if (support[m].empty() || support[n].empty()) continue;
            const double w = options.repulsion_scale * soft_iou_repulsion(masks[m], masks[n]).repulsion;
            for (std::size_t k = 0; k < samples_per_pair; ++k) {
                const NodeId a = support[m][rng.below(support[m].size())];
                const NodeId b = support[n][rng.below(support[n].size())];
                if (a != b) edges.push_back(repulsive(a, b, w));
            }
        }
    }
    return edges;
}

} // namespace smw
