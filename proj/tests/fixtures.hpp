#pragma once

// Hand-built requests and clusters shared by the unit tests, plus small
// random generators for property tests.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "streamplace/model.hpp"
#include "streamplace/rng.hpp"

namespace fixtures {

using namespace streamplace;

inline ResourceVector rv(double a, double b) { return ResourceVector{a, b}; }

/// Diamond A->B (1), A->C (1), B->D (1), C->D (3), one instance per
/// component with demands (2,2), (3,3), (1,1), (2,2); three (4,4) containers.
inline AppRequest diamond() {
    return expand_request(0, {1, 1, 1, 1}, {rv(2, 2), rv(3, 3), rv(1, 1), rv(2, 2)},
                          {{0, 1, 1.0}, {0, 2, 1.0}, {1, 3, 1.0}, {2, 3, 3.0}}, 3, rv(4, 4));
}

/// Chain P->Q (1), Q->R (2), one (1,1) instance each, three (2,2) containers.
inline AppRequest chain3() {
    return expand_request(0, {1, 1, 1}, {rv(1, 1), rv(1, 1), rv(1, 1)}, {{0, 1, 1.0}, {1, 2, 2.0}}, 3, rv(2, 2));
}

/// Instance i of chain3() in container i.
inline IcmpAssignment chain3_spread() {
    IcmpAssignment x(0, 3);
    x.target_of = {0, 1, 2};
    return x;
}

/// Two servers one hop apart with capacities (4,4) and (5,5).
inline ClusterState two_servers() {
    return ClusterState({{0, rv(4, 4)}, {1, rv(5, 5)}}, {0, 1, 1, 0});
}

inline ClusterState uniform_cluster(std::size_t n, const ResourceVector& cap, double hop) {
    std::vector<Server> servers;
    std::vector<double> theta(n * n, hop);
    for (std::size_t s = 0; s < n; ++s) {
        servers.push_back({static_cast<Index>(s), cap});
        theta[s * n + s] = 0.0;
    }
    return ClusterState(std::move(servers), std::move(theta));
}

/// Random small request: up to `max_components` components in a random
/// DAG (edges only from lower to higher id), parallelism 1..max_parallelism,
/// integer demands, `containers` identical containers.
inline AppRequest random_request(Rng& rng, std::size_t max_components, int max_parallelism, std::size_t containers,
                                 double capacity, Index id = 0) {
    const auto m = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(max_components)));
    std::vector<int> par(m);
    std::vector<ResourceVector> demand;
    for (std::size_t v = 0; v < m; ++v) {
        par[v] = static_cast<int>(rng.uniform_int(1, max_parallelism));
        demand.push_back(rv(static_cast<double>(rng.uniform_int(1, 3)), static_cast<double>(rng.uniform_int(1, 3))));
    }
    std::vector<StreamEdge> edges;
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            if (rng.uniform_unit() < 0.5) {
                edges.push_back({static_cast<Index>(a), static_cast<Index>(b), 0.5 + 4.5 * rng.uniform_unit()});
            }
        }
    }
    return expand_request(id, par, demand, edges, containers, rv(capacity, capacity));
}

/// Random cluster with integer capacities and a random symmetric hop matrix
/// with entries in {1, 2, 3, 4}.
inline ClusterState random_cluster(Rng& rng, std::size_t n, int cap_lo, int cap_hi) {
    std::vector<Server> servers;
    for (std::size_t s = 0; s < n; ++s) {
        servers.push_back({static_cast<Index>(s), rv(static_cast<double>(rng.uniform_int(cap_lo, cap_hi)),
                                                     static_cast<double>(rng.uniform_int(cap_lo, cap_hi)))});
    }
    std::vector<double> theta(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            theta[a * n + b] = theta[b * n + a] = static_cast<double>(rng.uniform_int(1, 4));
        }
    }
    return ClusterState(std::move(servers), std::move(theta));
}

}  // namespace fixtures
