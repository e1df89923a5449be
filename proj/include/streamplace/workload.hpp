#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "streamplace/model.hpp"
#include "streamplace/ranges.hpp"
#include "streamplace/rng.hpp"

namespace streamplace {

/// Distribution of generated application requests. Defaults: depth 3-5,
/// 3-6 components, parallelism 2-6, 2-6 cores and 4-8 GB per instance.
struct WorkloadConfig {
    std::size_t n_requests = 10;
    IntRange depth{3, 5};
    IntRange components{3, 6};
    IntRange parallelism{2, 6};
    std::vector<IntRange> demand{{2, 6}, {4, 8}};
    RealRange edge_rate{1.0, 10.0};
    double extra_edge_probability = 0.25;  // per extra consecutive-layer pair
    double container_headroom = 2.0;       // container capacity = headroom * largest demand
    std::size_t container_slack = 1;       // containers beyond the dominant-dimension bound
    std::uint64_t seed = 1;

    void validate() const {
        auto check = [](auto r, const char* name) {
            if (r.lo > r.hi) throw ConfigError(std::string("empty range for ") + name);
        };
        check(depth, "depth");
        check(components, "components");
        check(parallelism, "parallelism");
        check(edge_rate, "edge_rate");
        for (const auto& d : demand) check(d, "demand");
        if (depth.lo < 1) throw ConfigError("depth must be >= 1");
        if (parallelism.lo < 1) throw ConfigError("parallelism must be >= 1");
        if (components.lo < 1) throw ConfigError("component count must be >= 1");
        if (depth.lo > components.hi) throw ConfigError("depth range cannot fit in the component range (m < d)");
        if (depth.hi == 1 && components.lo > 1) throw ConfigError("depth 1 allows only single-component requests");
        if (demand.empty()) throw ConfigError("at least one resource dimension is required");
        for (const auto& d : demand) {
            if (d.lo < 0) throw ConfigError("demands must be nonnegative");
        }
        if (edge_rate.lo < 0.0) throw ConfigError("edge rates must be nonnegative");
        if (!(container_headroom >= 1.0)) throw ConfigError("container headroom must be >= 1");
        if (!(extra_edge_probability >= 0.0 && extra_edge_probability <= 1.0)) {
            throw ConfigError("extra edge probability must lie in [0, 1]");
        }
    }
};

/// Layer index of every component (for inspection and tests).
inline std::vector<int> component_layers(const AppRequest& req) {
    std::vector<int> layer(req.component_count(), 0);
    for (Index v : req.topological_order()) {
        for (Index e : req.out_edges(v)) {
            const auto dst = static_cast<std::size_t>(req.edges()[static_cast<std::size_t>(e)].dst);
            layer[dst] = std::max(layer[dst], layer[static_cast<std::size_t>(v)] + 1);
        }
    }
    return layer;
}

/// Request `index` of the stream: a pure function of (cfg, index).
///
/// m components are split into d nonempty layers; every non-source gets a
/// stream from the previous layer, every non-sink a stream into the next,
/// and weakly disconnected pieces are joined, so the DAG is connected with
/// longest path exactly d components.
inline AppRequest generate_request(const WorkloadConfig& cfg, std::size_t index) {
    cfg.validate();
    Rng rng(derive_seed(cfg.seed, 0x7265717565737400ULL, index));

    // A connected DAG with longest path 1 has a single component, so
    // several components need depth >= 2.
    const std::int64_t m_lo = std::max(cfg.components.lo, cfg.depth.lo);
    const std::int64_t m_hi = cfg.depth.hi == 1 ? 1 : cfg.components.hi;
    const auto m = static_cast<std::size_t>(rng.uniform_int(m_lo, m_hi));
    const std::int64_t d_lo = m > 1 ? std::max<std::int64_t>(cfg.depth.lo, 2) : cfg.depth.lo;
    const auto d = static_cast<std::size_t>(rng.uniform_int(d_lo, std::min<std::int64_t>(cfg.depth.hi, static_cast<std::int64_t>(m))));

    // layer sizes: one component per layer, the rest scattered
    std::vector<std::size_t> layer_size(d, 1);
    for (std::size_t k = d; k < m; ++k) ++layer_size[rng.uniform_index(d)];
    std::vector<std::vector<Index>> layers(d);
    {
        Index next = 0;
        for (std::size_t l = 0; l < d; ++l) {
            for (std::size_t k = 0; k < layer_size[l]; ++k) layers[l].push_back(next++);
        }
    }

    std::vector<std::vector<bool>> linked(m, std::vector<bool>(m, false));
    std::vector<std::pair<Index, Index>> links;
    auto link = [&](Index a, Index b) {
        if (linked[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) return;
        linked[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;
        links.emplace_back(a, b);
    };
    for (std::size_t l = 1; l < d; ++l) {
        for (Index v : layers[l]) link(layers[l - 1][rng.uniform_index(layers[l - 1].size())], v);
    }
    for (std::size_t l = 0; l + 1 < d; ++l) {
        for (Index v : layers[l]) {
            bool has_out = false;
            for (Index u : layers[l + 1]) has_out = has_out || linked[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)];
            if (!has_out) link(v, layers[l + 1][rng.uniform_index(layers[l + 1].size())]);
        }
    }
    for (std::size_t l = 0; l + 1 < d; ++l) {
        for (Index v : layers[l]) {
            for (Index u : layers[l + 1]) {
                if (!linked[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] &&
                    rng.uniform_unit() < cfg.extra_edge_probability) {
                    link(v, u);
                }
            }
        }
    }
    // Join weakly connected pieces. Every piece reaches layer 0 through its
    // in-streams, so linking each stray layer-0 component to a layer-1
    // component of the first piece connects the graph.
    if (d >= 2) {
        std::vector<std::size_t> piece(m);
        std::iota(piece.begin(), piece.end(), 0);
        auto find = [&](std::size_t x) {
            while (piece[x] != x) x = piece[x] = piece[piece[x]];
            return x;
        };
        auto unite = [&](Index a, Index b) { piece[find(static_cast<std::size_t>(a))] = find(static_cast<std::size_t>(b)); };
        for (const auto& [a, b] : links) unite(a, b);
        const Index anchor = layers[0][0];
        for (Index v : layers[0]) {
            if (find(static_cast<std::size_t>(v)) == find(static_cast<std::size_t>(anchor))) continue;
            std::vector<Index> targets;
            for (Index u : layers[1]) {
                if (find(static_cast<std::size_t>(u)) == find(static_cast<std::size_t>(anchor))) targets.push_back(u);
            }
            const Index u = targets[rng.uniform_index(targets.size())];
            link(v, u);
            unite(v, u);
        }
    }
    std::sort(links.begin(), links.end());

    std::vector<StreamEdge> edges;
    for (const auto& [a, b] : links) edges.push_back({a, b, rng.uniform_real(cfg.edge_rate.lo, cfg.edge_rate.hi)});

    std::vector<int> parallelism(m);
    std::vector<ResourceVector> demand(m, ResourceVector(cfg.demand.size()));
    for (std::size_t v = 0; v < m; ++v) {
        parallelism[v] = static_cast<int>(rng.uniform_int(cfg.parallelism.lo, cfg.parallelism.hi));
        for (std::size_t k = 0; k < cfg.demand.size(); ++k) {
            demand[v][k] = static_cast<double>(rng.uniform_int(cfg.demand[k].lo, cfg.demand[k].hi));
        }
    }

    ResourceVector capacity(cfg.demand.size());
    ResourceVector total(cfg.demand.size());
    for (std::size_t v = 0; v < m; ++v) {
        for (std::size_t k = 0; k < cfg.demand.size(); ++k) {
            capacity[k] = std::max(capacity[k], demand[v][k]);
            total[k] += demand[v][k] * parallelism[v];
        }
    }
    double dominant = 0.0;
    for (std::size_t k = 0; k < capacity.dims(); ++k) {
        capacity[k] = std::max(capacity[k] * cfg.container_headroom, 1.0);
        dominant = std::max(dominant, total[k] / capacity[k]);
    }
    const auto containers = static_cast<std::size_t>(std::ceil(dominant - kTolerance)) + cfg.container_slack;

    return expand_request(static_cast<Index>(index), parallelism, demand, std::move(edges), containers, capacity);
}

/// Requests 0..n-1 in arrival (FIFO) order.
inline std::vector<AppRequest> generate_stream(const WorkloadConfig& cfg) {
    std::vector<AppRequest> out;
    out.reserve(cfg.n_requests);
    for (std::size_t r = 0; r < cfg.n_requests; ++r) out.push_back(generate_request(cfg, r));
    return out;
}

}  // namespace streamplace
