#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "streamplace/model.hpp"
#include "streamplace/ranges.hpp"
#include "streamplace/rng.hpp"
#include "streamplace/topology.hpp"

namespace streamplace {

/// Cluster shape and server capacity distribution. Capacities are drawn as
/// integers uniformly from each range (default 16-64 cores, 8-32 GB).
struct ClusterConfig {
    TopologyKind topology = TopologyKind::fat_tree;
    int fat_tree_k = 4;
    std::size_t jellyfish_switches = 24;
    std::size_t jellyfish_ports = 4;
    std::size_t jellyfish_servers = 16;
    std::vector<IntRange> capacity{{16, 64}, {8, 32}};
    std::uint64_t seed = 1;

    void validate() const {
        if (capacity.empty()) throw ConfigError("at least one resource dimension is required");
        for (const auto& r : capacity) {
            if (r.lo > r.hi) throw ConfigError("empty server capacity range");
            if (r.lo < 1) throw ConfigError("server capacities must be strictly positive");
        }
        if (topology == TopologyKind::fat_tree && (fat_tree_k < 2 || fat_tree_k % 2 != 0)) {
            throw ConfigError("fat-tree k must be even and >= 2");
        }
        if (topology == TopologyKind::jellyfish) {
            if (jellyfish_switches == 0 || jellyfish_ports == 0) throw ConfigError("jellyfish needs switches and ports");
            if (jellyfish_servers > jellyfish_switches * (jellyfish_ports - 1)) {
                throw ConfigError("too many jellyfish servers for the available ports");
            }
        }
    }
};

struct Cluster {
    NetworkGraph graph;
    ClusterState state;
};

inline NetworkGraph build_network(const ClusterConfig& cfg) {
    cfg.validate();
    if (cfg.topology == TopologyKind::fat_tree) return build_fat_tree(cfg.fat_tree_k);
    return build_jellyfish(cfg.jellyfish_switches, cfg.jellyfish_ports, cfg.jellyfish_servers,
                           derive_seed(cfg.seed, 0x6a656c6c79ULL, 0));
}

/// Fresh cluster with nothing committed. Same config, same cluster.
inline Cluster build_cluster(const ClusterConfig& cfg) {
    NetworkGraph graph = build_network(cfg);
    Rng rng(derive_seed(cfg.seed, 0x736572766572ULL, 0));
    std::vector<Server> servers;
    servers.reserve(graph.server_count);
    for (std::size_t s = 0; s < graph.server_count; ++s) {
        ResourceVector cap(cfg.capacity.size());
        for (std::size_t k = 0; k < cfg.capacity.size(); ++k) {
            cap[k] = static_cast<double>(rng.uniform_int(cfg.capacity[k].lo, cfg.capacity[k].hi));
        }
        servers.push_back({static_cast<Index>(s), cap});
    }
    ClusterState state(std::move(servers), hop_cost_matrix(graph));
    return {std::move(graph), std::move(state)};
}

}  // namespace streamplace
