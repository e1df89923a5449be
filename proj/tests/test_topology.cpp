#include <gtest/gtest.h>

#include <set>

#include "streamplace/cluster.hpp"
#include "streamplace/topology.hpp"

using namespace streamplace;

namespace {

double theta(const std::vector<double>& m, std::size_t n, std::size_t a, std::size_t b) { return m[a * n + b]; }

void expect_metric(const std::vector<double>& m, std::size_t n) {
    for (std::size_t a = 0; a < n; ++a) {
        EXPECT_EQ(theta(m, n, a, a), 0.0);
        for (std::size_t b = 0; b < n; ++b) {
            EXPECT_EQ(theta(m, n, a, b), theta(m, n, b, a));
            for (std::size_t c = 0; c < n; ++c) EXPECT_LE(theta(m, n, a, c), theta(m, n, a, b) + theta(m, n, b, c));
        }
    }
}

std::size_t attached_switch(const NetworkGraph& g, std::size_t s) {
    const auto& n = g.adjacency[g.server_node(s)];
    EXPECT_EQ(n.size(), 1u);
    return n.front();
}

}  // namespace

TEST(FatTree, CanonicalCounts) {
    const auto g4 = build_fat_tree(4);
    EXPECT_EQ(g4.server_count, 16u);
    EXPECT_EQ(g4.switch_count, 20u);
    const auto g2 = build_fat_tree(2);
    EXPECT_EQ(g2.server_count, 2u);
    EXPECT_EQ(g2.switch_count, 5u);
    const auto g6 = build_fat_tree(6);
    EXPECT_EQ(g6.server_count, 54u);
    EXPECT_EQ(g6.switch_count, 45u);
    for (std::size_t v = 0; v < g4.switch_count; ++v) EXPECT_EQ(g4.adjacency[v].size(), 4u);
}

TEST(FatTree, RejectsOddOrNonpositiveK) {
    EXPECT_THROW(build_fat_tree(3), std::invalid_argument);
    EXPECT_THROW(build_fat_tree(0), std::invalid_argument);
    EXPECT_THROW(build_fat_tree(-2), std::invalid_argument);
}

TEST(FatTree, HopCostsAreZeroTwoFourOrSix) {
    const auto g = build_fat_tree(4);
    const auto m = hop_cost_matrix(g);
    const std::size_t n = g.server_count;
    std::set<double> values(m.begin(), m.end());
    EXPECT_EQ(values, (std::set<double>{0, 2, 4, 6}));
    expect_metric(m, n);
    // Servers 0 and 1 share an edge switch; server 15 sits in the last pod.
    EXPECT_EQ(attached_switch(g, 0), attached_switch(g, 1));
    EXPECT_EQ(theta(m, n, 0, 1), 2.0);
    EXPECT_EQ(theta(m, n, 0, 2), 4.0);
    EXPECT_EQ(theta(m, n, 0, 15), 6.0);
}

TEST(Jellyfish, TwentyFourSwitchGraph) {
    const auto g = build_jellyfish(24, 4, 16, 5);
    EXPECT_EQ(g.server_count, 16u);
    EXPECT_EQ(g.switch_count, 24u);
    for (std::size_t v = 0; v < g.switch_count; ++v) EXPECT_LE(g.adjacency[v].size(), 4u);
    for (std::size_t s = 0; s < g.server_count; ++s) {
        EXPECT_LT(attached_switch(g, s), g.switch_count);
        EXPECT_EQ(attached_switch(g, s), s % 24);  // round-robin
    }
    const auto m = hop_cost_matrix(g);
    expect_metric(m, g.server_count);
}

TEST(Jellyfish, DeterministicPerSeed) {
    EXPECT_EQ(build_jellyfish(24, 4, 16, 9).edge_list(), build_jellyfish(24, 4, 16, 9).edge_list());
    EXPECT_NE(build_jellyfish(24, 4, 16, 9).edge_list(), build_jellyfish(24, 4, 16, 10).edge_list());
}

TEST(Jellyfish, SingleSwitch) {
    const auto g = build_jellyfish(1, 4, 1, 1);
    EXPECT_EQ(hop_cost_matrix(g), std::vector<double>{0.0});
}

TEST(Jellyfish, TooManyServersRejected) {
    EXPECT_THROW(build_jellyfish(2, 2, 3, 1), std::invalid_argument);
}

TEST(HopCost, DisconnectedGraphNamesPair) {
    NetworkGraph g;
    g.switch_count = 2;
    g.server_count = 2;
    g.adjacency.assign(4, {});
    g.add_link(0, 2);
    g.add_link(1, 3);
    try {
        (void)hop_cost_matrix(g);
        FAIL() << "expected TopologyError";
    } catch (const TopologyError& e) {
        EXPECT_NE(std::string(e.what()).find("servers 0 and 1"), std::string::npos);
    }
}

TEST(HopCost, TwoServersOnOneSwitch) {
    NetworkGraph g;
    g.switch_count = 1;
    g.server_count = 2;
    g.adjacency.assign(3, {});
    g.add_link(0, 1);
    g.add_link(0, 2);
    EXPECT_EQ(hop_cost_matrix(g), (std::vector<double>{0, 2, 2, 0}));
}

TEST(Cluster, BuildIsDeterministicAndInRange) {
    ClusterConfig cfg;
    cfg.seed = 17;
    const auto a = build_cluster(cfg);
    const auto b = build_cluster(cfg);
    ASSERT_EQ(a.state.server_count(), 16u);
    for (std::size_t s = 0; s < 16; ++s) {
        const auto& cap = a.state.server(static_cast<Index>(s)).capacity;
        EXPECT_EQ(cap, b.state.server(static_cast<Index>(s)).capacity);
        EXPECT_GE(cap[0], 16);
        EXPECT_LE(cap[0], 64);
        EXPECT_GE(cap[1], 8);
        EXPECT_LE(cap[1], 32);
        EXPECT_EQ(cap[0], std::floor(cap[0]));
    }
    cfg.topology = TopologyKind::jellyfish;
    const auto j = build_cluster(cfg);
    EXPECT_EQ(j.state.server_count(), 16u);
    EXPECT_EQ(j.graph.switch_count, 24u);
}

TEST(Cluster, ConfigErrors) {
    ClusterConfig cfg;
    cfg.fat_tree_k = 5;
    EXPECT_THROW(build_cluster(cfg), ConfigError);
    cfg = {};
    cfg.capacity = {{10, 2}};
    EXPECT_THROW(build_cluster(cfg), ConfigError);
}
