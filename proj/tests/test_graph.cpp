#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "smw/graph.hpp"
#include "smw/random_graph.hpp"
#include "smw/rng.hpp"

using namespace smw;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::IoError;
}

ExtendedGraph weights_only(const std::vector<double>& ws) {
    std::vector<EdgeSpec> edges;
    for (double w : ws) edges.push_back(attractive(0, 1, w));
    return build_graph(2, 0, edges);
}

} // namespace

TEST(BuildGraph, EmptyGraph) {
    const auto g = build_graph(2, 0, {});
    EXPECT_EQ(g.num_nodes(), 2u);
    EXPECT_EQ(g.num_labels(), 0u);
    EXPECT_EQ(g.num_edges(), 0u);
}

TEST(BuildGraph, SingleEdgeGetsIdZero) {
    const auto g = build_graph(2, 1, {attractive(0, 1, 0.9)});
    ASSERT_EQ(g.num_edges(), 1u);
    EXPECT_EQ(g.edge(0).id, 0u);
    EXPECT_EQ(g.edge(0).u, 0u);
    EXPECT_EQ(g.edge(0).v(), 1u);
    EXPECT_DOUBLE_EQ(g.edge(0).weight, 0.9);
}

TEST(BuildGraph, RejectsNegativeWeight) {
    EXPECT_EQ(code_of([] { build_graph(3, 2, {attractive(0, 1, -0.1)}); }), ErrorCode::NegativeOrNonFiniteWeight);
    EXPECT_EQ(code_of([] { build_graph(3, 2, {repulsive(0, 1, std::nan(""))}); }),
              ErrorCode::NegativeOrNonFiniteWeight);
    EXPECT_EQ(code_of([] { build_graph(3, 2, {semantic(0, 1, std::numeric_limits<double>::infinity())}); }),
              ErrorCode::NegativeOrNonFiniteWeight);
}

TEST(BuildGraph, RejectsOutOfRange) {
    EXPECT_EQ(code_of([] { build_graph(2, 1, {attractive(0, 2, 0.5)}); }), ErrorCode::OutOfRangeEndpoint);
    EXPECT_EQ(code_of([] { build_graph(2, 1, {repulsive(5, 0, 0.5)}); }), ErrorCode::OutOfRangeEndpoint);
    EXPECT_EQ(code_of([] { build_graph(2, 1, {attractive(1, 1, 0.5)}); }), ErrorCode::OutOfRangeEndpoint);
    EXPECT_EQ(code_of([] { build_graph(2, 1, {semantic(0, 1, 0.5)}); }), ErrorCode::LabelOutOfRange);
}

TEST(BuildGraph, ParallelEdgesKeepTheirOwnIds) {
    const auto g = build_graph(2, 0, {attractive(0, 1, 0.5), attractive(1, 0, 0.5), repulsive(0, 1, 0.2)});
    ASSERT_EQ(g.num_edges(), 3u);
    for (EdgeId e = 0; e < 3; ++e) EXPECT_EQ(g.edge(e).id, e);
}

TEST(BuildGraph, NegativeZeroIsNormalized) {
    const auto g = build_graph(2, 0, {attractive(0, 1, -0.0)});
    EXPECT_FALSE(std::signbit(g.edge(0).weight));
}

TEST(SortEdges, DescendingWeight) {
    EXPECT_EQ(sort_edges(weights_only({0.1, 0.9, 0.5})).permutation, (std::vector<EdgeId>{1, 2, 0}));
}

TEST(SortEdges, TiesByAscendingId) {
    EXPECT_EQ(sort_edges(weights_only({0.5, 0.5})).permutation, (std::vector<EdgeId>{0, 1}));
}

TEST(SortEdges, Empty) { EXPECT_TRUE(sort_edges(build_graph(3, 0, {})).permutation.empty()); }

TEST(SortEdges, RanksCountFromWeakest) {
    EXPECT_EQ(sort_edges(weights_only({0.1, 0.9, 0.5})).ranks(), (std::vector<std::uint32_t>{0, 2, 1}));
}

// Property: valid permutation, non-increasing weights, ties in id order. Runs
// across the small-input comparison sort and the radix path used for large inputs.
TEST(SortEdges, PermutationPropertyBothPaths) {
    Rng rng(11);
    for (std::size_t size : {0u, 1u, 7u, 100u, 4095u, 4096u, 20000u}) {
        std::vector<double> ws(size);
        for (auto& w : ws) w = rng.chance(0.3) ? std::floor(rng.uniform() * 8.0) / 8.0 : rng.uniform(0.0, 3.0);
        const auto g = weights_only(ws);
        const auto order = sort_edges(g);
        ASSERT_EQ(order.size(), size);
        std::vector<bool> seen(size, false);
        for (std::size_t i = 0; i < size; ++i) {
            ASSERT_LT(order[i], size);
            ASSERT_FALSE(seen[order[i]]);
            seen[order[i]] = true;
            if (i > 0) {
                const double prev = ws[order[i - 1]], cur = ws[order[i]];
                ASSERT_GE(prev, cur);
                if (prev == cur) {
                    ASSERT_LT(order[i - 1], order[i]);
                }
            }
        }
    }
}

TEST(SortEdges, RadixMatchesComparisonSort) {
    Rng rng(5);
    std::vector<double> ws(50000);
    for (auto& w : ws) w = std::floor(rng.uniform() * 1000.0) / 1000.0;
    const auto g = weights_only(ws);
    std::vector<EdgeId> expected(ws.size());
    for (EdgeId i = 0; i < expected.size(); ++i) expected[i] = i;
    std::stable_sort(expected.begin(), expected.end(), [&](EdgeId a, EdgeId b) { return ws[a] > ws[b]; });
    EXPECT_EQ(sort_edges(g).permutation, expected);
}

// Large inputs split on high digits first; clustered weights force nested
// splits. The reference is a plain stable comparison sort.
TEST(SortEdges, LargeAndClusteredInputsMatchComparisonSort) {
    Rng rng(9);
    for (std::size_t size : {32768u, 32769u, 70000u, 200000u}) {
        std::vector<double> ws(size);
        for (auto& w : ws) {
            const double pick = rng.uniform();
            if (pick < 0.6)
                w = std::nextafter(0.75, 1.0) + 1e-12 * std::floor(rng.uniform() * 4096.0);
            else if (pick < 0.7)
                w = 0.0;
            else if (pick < 0.8)
                w = 1e300 * rng.uniform();
            else
                w = rng.uniform();
        }
        const auto g = weights_only(ws);
        std::vector<EdgeId> expected(size);
        for (EdgeId i = 0; i < size; ++i) expected[i] = i;
        std::stable_sort(expected.begin(), expected.end(), [&](EdgeId a, EdgeId b) { return ws[a] > ws[b]; });
        ASSERT_EQ(sort_edges(g).permutation, expected) << size;
        const auto sorted = sorted_edges(g);
        ASSERT_EQ(sorted.size(), size);
        for (std::size_t i = 0; i < size; ++i) ASSERT_EQ(sorted[i], g.edge(expected[i]));
    }
}

TEST(SortEdges, AllEqualLargeInputKeepsIdOrder) {
    const auto g = weights_only(std::vector<double>(40000, 0.5));
    const auto order = sort_edges(g);
    for (EdgeId i = 0; i < 40000; ++i) ASSERT_EQ(order[i], i);
}

TEST(StripSemantic, KeepsInternalEdgesInOrder) {
    const auto g = build_graph(3, 2, {semantic(0, 1, 0.4), attractive(0, 1, 0.3), semantic(2, 0, 0.1),
                                      repulsive(1, 2, 0.2)});
    const auto s = strip_semantic(g);
    ASSERT_EQ(s.num_edges(), 2u);
    EXPECT_TRUE(s.edge(0).is_attractive());
    EXPECT_TRUE(s.edge(1).is_repulsive());
}

TEST(Rng, DeterministicAndInRange) {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        const auto x = a.next();
        ASSERT_EQ(x, b.next());
    }
    Rng c(3);
    for (int i = 0; i < 1000; ++i) {
        const double u = c.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        ASSERT_LT(c.below(7), 7u);
    }
}

TEST(Rng, SplitmixReferenceValue) {
    // First output of splitmix64 seeded with 0 (reference implementation by Vigna).
    std::uint64_t x = 0;
    EXPECT_EQ(Rng::splitmix64(x), 0xe220a8397b1dcdafULL);
}

TEST(RandomGraph, RespectsBounds) {
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
        const auto g = random_extended_graph(rng);
        EXPECT_LE(g.num_nodes(), 8u);
        EXPECT_LE(g.num_labels(), 3u);
        EXPECT_LE(g.num_edges(), 18u);
    }
}
