#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "streamplace/rng.hpp"

namespace streamplace {

class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TopologyKind { fat_tree, jellyfish };

inline const char* to_string(TopologyKind kind) { return kind == TopologyKind::fat_tree ? "fat-tree" : "jellyfish"; }

inline TopologyKind topology_kind_from_string(const std::string& name) {
    if (name == "fat-tree") return TopologyKind::fat_tree;
    if (name == "jellyfish") return TopologyKind::jellyfish;
    throw std::invalid_argument("unknown topology kind '" + name + "' (expected fat-tree or jellyfish)");
}

/// Undirected switch/server graph. Nodes [0, switch_count) are switches,
/// node switch_count + s is server s.
struct NetworkGraph {
    TopologyKind kind = TopologyKind::fat_tree;
    std::size_t switch_count = 0;
    std::size_t server_count = 0;
    std::size_t port_count = 0;
    double link_bandwidth_gbps = 40.0;  // metadata only; never constrains placement
    std::vector<std::vector<std::size_t>> adjacency;

    std::size_t node_count() const noexcept { return switch_count + server_count; }
    std::size_t server_node(std::size_t s) const noexcept { return switch_count + s; }

    void add_link(std::size_t a, std::size_t b) {
        adjacency[a].push_back(b);
        adjacency[b].push_back(a);
    }

    bool linked(std::size_t a, std::size_t b) const {
        const auto& n = adjacency[a];
        return std::find(n.begin(), n.end(), b) != n.end();
    }

    std::size_t link_count() const noexcept {
        std::size_t d = 0;
        for (const auto& n : adjacency) d += n.size();
        return d / 2;
    }

    /// Sorted undirected edge list (a < b), for comparisons and export.
    std::vector<std::pair<std::size_t, std::size_t>> edge_list() const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (std::size_t a = 0; a < adjacency.size(); ++a) {
            for (std::size_t b : adjacency[a]) {
                if (a < b) out.emplace_back(a, b);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }
};

/// Canonical k-ary fat-tree: (k/2)^2 core switches, k pods of k/2
/// aggregation + k/2 edge switches, k/2 servers per edge switch.
inline NetworkGraph build_fat_tree(int k) {
    if (k < 2 || k % 2 != 0) throw std::invalid_argument("fat-tree arity k must be even and >= 2, got " + std::to_string(k));
    const std::size_t half = static_cast<std::size_t>(k / 2);
    const std::size_t pods = static_cast<std::size_t>(k);
    const std::size_t core = half * half;
    const std::size_t aggs = pods * half;
    const std::size_t edges = pods * half;

    NetworkGraph g;
    g.kind = TopologyKind::fat_tree;
    g.switch_count = core + aggs + edges;
    g.server_count = edges * half;
    g.port_count = static_cast<std::size_t>(k);
    g.adjacency.assign(g.node_count(), {});

    auto agg_node = [&](std::size_t pod, std::size_t j) { return core + pod * half + j; };
    auto edge_node = [&](std::size_t pod, std::size_t j) { return core + aggs + pod * half + j; };

    for (std::size_t pod = 0; pod < pods; ++pod) {
        for (std::size_t a = 0; a < half; ++a) {
            // aggregation switch a of every pod connects to core group a
            for (std::size_t c = 0; c < half; ++c) g.add_link(agg_node(pod, a), a * half + c);
            for (std::size_t e = 0; e < half; ++e) g.add_link(agg_node(pod, a), edge_node(pod, e));
        }
        for (std::size_t e = 0; e < half; ++e) {
            for (std::size_t h = 0; h < half; ++h) {
                const std::size_t server = (pod * half + e) * half + h;
                g.add_link(edge_node(pod, e), g.server_node(server));
            }
        }
    }
    return g;
}

namespace detail {

inline bool switches_connected(const NetworkGraph& g) {
    if (g.switch_count == 0) return true;
    std::vector<bool> seen(g.switch_count, false);
    std::deque<std::size_t> queue{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        for (std::size_t v : g.adjacency[u]) {
            if (v < g.switch_count && !seen[v]) {
                seen[v] = true;
                ++reached;
                queue.push_back(v);
            }
        }
    }
    return reached == g.switch_count;
}

}  // namespace detail

/// Jellyfish: servers attached round-robin to switches, remaining ports wired
/// into a random regular graph by the incremental link-swap procedure.
/// Deterministic given the seed; retries until the switch graph is connected.
inline NetworkGraph build_jellyfish(std::size_t n_switches, std::size_t n_ports, std::size_t n_servers,
                                    std::uint64_t seed, int max_retries = 64) {
    if (n_switches == 0) throw std::invalid_argument("jellyfish needs at least one switch");
    if (n_ports == 0) throw std::invalid_argument("jellyfish needs at least one port per switch");
    if (n_servers > n_switches * (n_ports - 1)) {
        throw std::invalid_argument("too many servers for the available switch ports");
    }

    Rng rng(seed);
    for (int attempt = 0; attempt < max_retries; ++attempt) {
        NetworkGraph g;
        g.kind = TopologyKind::jellyfish;
        g.switch_count = n_switches;
        g.server_count = n_servers;
        g.port_count = n_ports;
        g.adjacency.assign(g.node_count(), {});

        std::vector<std::size_t> free_ports(n_switches, n_ports);
        for (std::size_t s = 0; s < n_servers; ++s) {
            const std::size_t sw = s % n_switches;
            g.add_link(sw, g.server_node(s));
            --free_ports[sw];
        }

        auto candidates = [&] {
            std::vector<std::pair<std::size_t, std::size_t>> pairs;
            for (std::size_t a = 0; a < n_switches; ++a) {
                if (free_ports[a] == 0) continue;
                for (std::size_t b = a + 1; b < n_switches; ++b) {
                    if (free_ports[b] > 0 && !g.linked(a, b)) pairs.emplace_back(a, b);
                }
            }
            return pairs;
        };

        for (;;) {
            auto pairs = candidates();
            if (pairs.empty()) break;
            const auto [a, b] = pairs[rng.uniform_index(pairs.size())];
            g.add_link(a, b);
            --free_ports[a];
            --free_ports[b];
        }

        // Link swap: a switch p with >= 2 free ports removes a random link
        // (x, y) not touching p or its neighbours, and connects to both ends.
        for (std::size_t guard = 0; guard < n_switches * n_ports * 4; ++guard) {
            std::size_t p = n_switches;
            for (std::size_t s = 0; s < n_switches; ++s) {
                if (free_ports[s] >= 2) {
                    p = s;
                    break;
                }
            }
            if (p == n_switches) break;
            std::vector<std::pair<std::size_t, std::size_t>> removable;
            for (std::size_t x = 0; x < n_switches; ++x) {
                for (std::size_t y : g.adjacency[x]) {
                    if (y >= n_switches || x >= y) continue;
                    if (x == p || y == p || g.linked(p, x) || g.linked(p, y)) continue;
                    removable.emplace_back(x, y);
                }
            }
            if (removable.empty()) break;
            const auto [x, y] = removable[rng.uniform_index(removable.size())];
            auto drop = [&](std::size_t u, std::size_t v) {
                auto& n = g.adjacency[u];
                n.erase(std::find(n.begin(), n.end(), v));
            };
            drop(x, y);
            drop(y, x);
            g.add_link(p, x);
            g.add_link(p, y);
            free_ports[p] -= 2;
        }

        if (detail::switches_connected(g)) return g;
    }
    throw TopologyError("jellyfish construction produced no connected graph after " + std::to_string(max_retries) +
                        " attempts");
}

/// theta[s][s'] = shortest-path hop count between servers (row-major |S|x|S|).
inline std::vector<double> hop_cost_matrix(const NetworkGraph& g) {
    const std::size_t n = g.server_count;
    std::vector<double> theta(n * n, 0.0);
    constexpr std::size_t unseen = std::numeric_limits<std::size_t>::max();
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<std::size_t> dist(g.node_count(), unseen);
        std::deque<std::size_t> queue{g.server_node(s)};
        dist[g.server_node(s)] = 0;
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            for (std::size_t v : g.adjacency[u]) {
                if (dist[v] == unseen) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for (std::size_t t = 0; t < n; ++t) {
            const std::size_t d = dist[g.server_node(t)];
            if (d == unseen) {
                throw TopologyError("servers " + std::to_string(s) + " and " + std::to_string(t) + " are not connected");
            }
            theta[s * n + t] = static_cast<double>(d);
        }
    }
    return theta;
}

}  // namespace streamplace
