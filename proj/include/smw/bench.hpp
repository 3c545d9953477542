#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "smw/grid.hpp"
#include "smw/rng.hpp"
#include "smw/semantic_mutex_watershed.hpp"
#include "smw/tensor.hpp"

namespace smw {

struct SyntheticVolume {
    DenseTensor<float> affinities;
    OffsetPattern pattern;
    DenseTensor<float> semantic;
};

struct VolumeOptions {
    std::size_t cell = 8;
    double noise = 0.3;
    std::size_t classes = 2;
    std::int64_t long_range = 3;
};

/// Nearest-neighbour attractive offsets and axis-aligned long-range repulsive offsets.
inline OffsetPattern volume_offsets(std::int64_t long_range = 3) {
    OffsetPattern p;
    p.add({1, 0, 0}, Polarity::Attractive);
    p.add({0, 1, 0}, Polarity::Attractive);
    p.add({0, 0, 1}, Polarity::Attractive);
    p.add({long_range, 0, 0}, Polarity::Repulsive);
    p.add({0, long_range, 0}, Polarity::Repulsive);
    p.add({0, 0, long_range}, Polarity::Repulsive);
    return p;
}

/// Cube of side `size` tiled into boxes of side `cell` (each box is one object
/// with a random class). Affinities are 1 - noise*u inside a box and noise*u
/// across boxes; semantic probabilities favour the box class.
inline SyntheticVolume synthetic_volume(std::size_t size, std::uint64_t seed, const VolumeOptions& opts = {}) {
    SyntheticVolume v;
    v.pattern = volume_offsets(opts.long_range);
    const std::size_t n = size * size * size;
    v.affinities = DenseTensor<float>({v.pattern.size(), size, size, size});
    v.semantic = DenseTensor<float>({opts.classes, size, size, size});
    const GridGeometry grid({size, size, size});
    Rng rng(seed);

    const std::size_t cells = (size + opts.cell - 1) / opts.cell;
    std::vector<std::uint32_t> cell_class(cells * cells * cells);
    for (auto& c : cell_class) c = static_cast<std::uint32_t>(rng.below(opts.classes));
    std::vector<std::uint32_t> region(n);
    for (std::size_t z = 0, p = 0; z < size; ++z)
        for (std::size_t y = 0; y < size; ++y)
            for (std::size_t x = 0; x < size; ++x, ++p)
                region[p] = static_cast<std::uint32_t>(((z / opts.cell) * cells + y / opts.cell) * cells + x / opts.cell);

    for (std::size_t c = 0; c < v.pattern.size(); ++c) {
        float* a = v.affinities.values().data() + c * n;
        grid.for_each_pair(v.pattern[c].delta, [&](std::size_t p, std::size_t q) {
            const double u = opts.noise * rng.uniform();
            a[p] = static_cast<float>(region[p] == region[q] ? 1.0 - u : u);
        });
    }
    for (std::size_t p = 0; p < n; ++p) {
        const std::uint32_t truth = cell_class[region[p]];
        const double confident = 0.6 + 0.35 * rng.uniform();
        const double rest = (1.0 - confident) / static_cast<double>(opts.classes - 1 ? opts.classes - 1 : 1);
        for (std::size_t k = 0; k < opts.classes; ++k)
            v.semantic[k * n + p] = static_cast<float>(k == truth ? confident : rest);
    }
    return v;
}

struct BenchConfig {
    std::vector<std::size_t> sizes{16, 32, 64, 96};
    std::size_t repeats = 3;
    std::uint64_t seed = 1;
};

struct BenchRow {
    std::size_t size = 0, voxels = 0, edges = 0, repeat = 0;
    /// Cluster count of the result, a cheap check that repeats agree.
    std::size_t clusters = 0;
    double seconds = 0.0;
};

struct BenchSummary {
    std::size_t size = 0, voxels = 0, edges = 0;
    double median_seconds = 0.0;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    std::vector<BenchSummary> medians;
    /// Least-squares slope of log(median seconds) against log(edges).
    double slope = 0.0;
};

inline double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t m = xs.size() / 2;
    return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxx > 0 ? sxy / sxx : 0.0;
}

/// Times run_smw (edge sort included, graph construction excluded).
inline BenchReport run_bench(const BenchConfig& cfg) {
    BenchReport report;
    std::vector<double> xs, ys;
    for (std::size_t size : cfg.sizes) {
        std::size_t edges = 0;
        std::vector<double> times;
        {
            const ExtendedGraph g = [&] {
                const SyntheticVolume v = synthetic_volume(size, cfg.seed ^ size);
                return build_grid_graph(v.affinities, v.pattern, &v.semantic);
            }();
            edges = g.num_edges();
            for (std::size_t r = 0; r < cfg.repeats; ++r) {
                const auto t0 = std::chrono::steady_clock::now();
                const SegmentationResult result = run_smw(g);
                const auto t1 = std::chrono::steady_clock::now();
                times.push_back(std::chrono::duration<double>(t1 - t0).count());
                report.rows.push_back({size, size * size * size, edges, r, result.num_clusters(), times.back()});
            }
        }
        const double med = median(times);
        report.medians.push_back({size, size * size * size, edges, med});
        xs.push_back(static_cast<double>(edges));
        ys.push_back(med);
    }
    report.slope = loglog_slope(xs, ys);
    return report;
}

/// One row per repeat; the seconds column is left out when `timing` is false.
inline void write_bench_csv(std::ostream& out, const BenchReport& r, bool timing = true) {
    out << "size,voxels,edges,repeat,clusters" << (timing ? ",seconds" : "") << '\n';
    for (const BenchRow& row : r.rows) {
        out << row.size << ',' << row.voxels << ',' << row.edges << ',' << row.repeat << ',' << row.clusters;
        if (timing) out << ',' << row.seconds;
        out << '\n';
    }
}

} // namespace smw
