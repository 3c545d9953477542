#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "smw/bench.hpp"

using namespace smw;

TEST(Median, OddAndEven) {
    EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
    EXPECT_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
    EXPECT_EQ(median({7.0}), 7.0);
}

TEST(LoglogSlope, PowerLaws) {
    const std::vector<double> x{10, 100, 1000, 5000};
    std::vector<double> lin, quad, flat;
    for (double v : x) {
        lin.push_back(3e-7 * v);
        quad.push_back(2e-9 * v * v);
        flat.push_back(0.5);
    }
    EXPECT_NEAR(loglog_slope(x, lin), 1.0, 1e-12);
    EXPECT_NEAR(loglog_slope(x, quad), 2.0, 1e-12);
    EXPECT_NEAR(loglog_slope(x, flat), 0.0, 1e-12);
    EXPECT_EQ(loglog_slope({5}, {1}), 0.0);
}

TEST(SyntheticVolume, ShapesAndEdgeCount) {
    const auto v = synthetic_volume(16, 3);
    EXPECT_EQ(v.affinities.shape(), (std::vector<std::size_t>{6, 16, 16, 16}));
    EXPECT_EQ(v.semantic.shape(), (std::vector<std::size_t>{2, 16, 16, 16}));
    const auto g = build_grid_graph(v.affinities, v.pattern, &v.semantic);
    // 3 axes x 16^2 x (16 - d) pairs for d = 1 and d = 3, plus one semantic edge per voxel and class
    EXPECT_EQ(g.num_edges(), 3u * 256 * 15 + 3u * 256 * 13 + 2u * 4096);
    EXPECT_EQ(synthetic_volume(16, 3).affinities, v.affinities);
}

TEST(SyntheticVolume, NoiselessVolumeSegmentsIntoBoxes) {
    VolumeOptions opts;
    opts.noise = 0.0;
    opts.cell = 4;
    const std::size_t size = 12;
    const auto v = synthetic_volume(size, 9, opts);
    const auto r = run_smw(build_grid_graph(v.affinities, v.pattern, &v.semantic));
    ASSERT_EQ(r.num_clusters(), 27u);
    for (std::size_t z = 0, p = 0; z < size; ++z)
        for (std::size_t y = 0; y < size; ++y)
            for (std::size_t x = 0; x < size; ++x, ++p) {
                const std::size_t q = ((z / 4 * 4) * size + y / 4 * 4) * size + x / 4 * 4;
                EXPECT_EQ(r.node_cluster[p], r.node_cluster[q]);
                // semantic argmax of the voxel is its box class
                const LabelId truth = v.semantic[p] > v.semantic[size * size * size + p] ? 0 : 1;
                EXPECT_EQ(r.node_label(static_cast<NodeId>(p)), truth);
            }
}

TEST(RunBench, RowsAndCsv) {
    BenchConfig cfg;
    cfg.sizes = {6, 10};
    cfg.repeats = 3;
    const auto rep = run_bench(cfg);
    ASSERT_EQ(rep.rows.size(), 6u);
    ASSERT_EQ(rep.medians.size(), 2u);
    for (const auto& row : rep.rows) {
        EXPECT_EQ(row.voxels, row.size * row.size * row.size);
        EXPECT_EQ(row.clusters, rep.rows[row.size == 6 ? 0 : 3].clusters);
    }
    std::ostringstream csv;
    write_bench_csv(csv, rep, false);
    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "size,voxels,edges,repeat,clusters");
    std::getline(in, line);
    EXPECT_EQ(line.rfind("6,216,", 0), 0u);
    std::ostringstream again;
    write_bench_csv(again, run_bench(cfg), false);
    EXPECT_EQ(again.str(), csv.str());
}
