#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "support/fixtures.hpp"

using namespace vaxsim;

TEST(Graph, RejectsMalformedEdgeLists) {
    std::vector<std::pair<NodeId, NodeId>> loop{{0, 0}};
    EXPECT_THROW(Graph(2, loop), ConfigError);
    std::vector<std::pair<NodeId, NodeId>> dup{{0, 1}, {1, 0}};
    EXPECT_THROW(Graph(2, dup), ConfigError);
    std::vector<std::pair<NodeId, NodeId>> range{{0, 5}};
    EXPECT_THROW(Graph(3, range), ConfigError);
}

TEST(WattsStrogatz, EdgeCountIsNkOverTwoForAnyP) {
    for (double p : {0.0, 0.01, 0.3, 1.0}) {
        Rng rng(derive_key(3, {static_cast<std::uint64_t>(p * 100)}));
        const Graph g = generate_watts_strogatz(5000, 10, p, rng);
        EXPECT_EQ(g.node_count(), 5000u);
        EXPECT_EQ(g.edge_count(), 25000u) << "p=" << p;
    }
}

TEST(WattsStrogatz, RingLatticeNeighborhood) {
    Rng rng(1);
    const Graph g = generate_watts_strogatz(10, 4, 0.0, rng);
    const auto nb = g.neighbors(0);
    EXPECT_EQ(std::set<NodeId>(nb.begin(), nb.end()), (std::set<NodeId>{1, 2, 8, 9}));
    for (NodeId i = 0; i < 10; ++i) EXPECT_EQ(g.degree(i), 4u);
}

TEST(WattsStrogatz, FullRewiringKeepsMeanDegreeButSpreadsIt) {
    double var_sum = 0.0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        Rng rng(derive_key(11, {rep}));
        const Graph g = generate_watts_strogatz(1000, 10, 1.0, rng);
        double sum = 0.0, sq = 0.0;
        for (NodeId i = 0; i < 1000; ++i) {
            sum += static_cast<double>(g.degree(i));
            sq += static_cast<double>(g.degree(i) * g.degree(i));
        }
        ASSERT_DOUBLE_EQ(sum / 1000.0, 10.0);
        var_sum += sq / 1000.0 - 100.0;
    }
    EXPECT_GT(var_sum / 100.0, 0.0);
}

TEST(WattsStrogatz, SimpleAndSymmetric) {
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
        Rng rng(derive_key(21, {rep}));
        const double p = rng.uniform();
        const std::size_t n = 20 + rng.uniform_index(200);
        const std::size_t k = 2 * (1 + rng.uniform_index(4));
        const Graph g = generate_watts_strogatz(n, k, p, rng);
        for (NodeId i = 0; i < n; ++i) {
            for (NodeId j : g.neighbors(i)) {
                EXPECT_NE(i, j);
                EXPECT_TRUE(g.has_edge(j, i));
            }
        }
    }
}

TEST(WattsStrogatz, SameStreamSameGraph) {
    Rng a = seed_schedule(5, 2, StreamDomain::graph);
    Rng b = seed_schedule(5, 2, StreamDomain::graph);
    EXPECT_EQ(generate_watts_strogatz(500, 10, 0.1, a).edges(), generate_watts_strogatz(500, 10, 0.1, b).edges());
}

// One Bernoulli draw per lattice edge whatever p is, so the stream position
// after generation does not depend on p when nothing is rewired.
TEST(WattsStrogatz, ConsumesOneDrawPerLatticeEdgeWithoutRewiring) {
    Rng used(99);
    (void)generate_watts_strogatz(100, 6, 0.0, used);
    Rng ref(99);
    for (int i = 0; i < 300; ++i) (void)ref.uniform();
    EXPECT_EQ(used(), ref());
}

TEST(WattsStrogatz, RejectsBadParameters) {
    Rng rng(1);
    EXPECT_THROW(generate_watts_strogatz(10, 3, 0.1, rng), ConfigError);
    EXPECT_THROW(generate_watts_strogatz(10, 0, 0.1, rng), ConfigError);
    EXPECT_THROW(generate_watts_strogatz(10, 10, 0.1, rng), ConfigError);
    EXPECT_THROW(generate_watts_strogatz(10, 4, 1.5, rng), ConfigError);
}

TEST(Graph, EdgeListOutput) {
    std::ostringstream out;
    write_edge_list(fixtures::path_graph(3), out);
    EXPECT_EQ(out.str(), "0 1\n1 2\n");
}
