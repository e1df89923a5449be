#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "streamplace/model.hpp"

namespace streamplace {

/// Weight of cross-container traffic against container count in the
/// instance-to-container objective: alpha * T + (1 - alpha) * U.
struct ObjectiveConfig {
    double alpha = 0.5;

    ObjectiveConfig() = default;
    explicit ObjectiveConfig(double a) : alpha(a) {
        if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1], got " + std::to_string(a));
    }
};

namespace detail {

// instances of each component per container, flattened [component][container]
inline std::vector<int> component_counts(const AppRequest& req, const Mapping& icmp) {
    const std::size_t nc = req.container_count();
    std::vector<int> counts(req.component_count() * nc, 0);
    for (std::size_t i = 0; i < icmp.size(); ++i) {
        const Index c = icmp.target_of[i];
        if (c == kUnassigned) continue;
        ++counts[static_cast<std::size_t>(req.instances()[i].component) * nc + static_cast<std::size_t>(c)];
    }
    return counts;
}

}  // namespace detail

/// Directed container-to-container traffic T_{c,c'} for a (possibly partial)
/// instance placement. Entry (c, c) holds intra-container traffic.
class ContainerTraffic {
public:
    ContainerTraffic() = default;

    ContainerTraffic(const AppRequest& req, const IcmpAssignment& icmp) : n_(req.container_count()), t_(n_ * n_, 0.0) {
        const auto counts = detail::component_counts(req, icmp);
        for (std::size_t e = 0; e < req.edges().size(); ++e) {
            const auto& edge = req.edges()[e];
            const double rate = req.edge_pair_rate(static_cast<Index>(e));
            const std::size_t src = static_cast<std::size_t>(edge.src) * n_;
            const std::size_t dst = static_cast<std::size_t>(edge.dst) * n_;
            for (std::size_t c1 = 0; c1 < n_; ++c1) {
                if (counts[src + c1] == 0) continue;
                for (std::size_t c2 = 0; c2 < n_; ++c2) {
                    t_[c1 * n_ + c2] += rate * counts[src + c1] * counts[dst + c2];
                }
            }
        }
    }

    std::size_t size() const noexcept { return n_; }
    double operator()(Index c1, Index c2) const { return t_[static_cast<std::size_t>(c1) * n_ + static_cast<std::size_t>(c2)]; }

    /// T_{c,c'} + T_{c',c}
    double both_ways(Index c1, Index c2) const { return (*this)(c1, c2) + (*this)(c2, c1); }

    double cross_total() const noexcept {
        double sum = 0.0;
        for (std::size_t a = 0; a < n_; ++a) {
            for (std::size_t b = 0; b < n_; ++b) {
                if (a != b) sum += t_[a * n_ + b];
            }
        }
        return sum;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> t_;
};

/// Directed traffic from container c1 to container c2 (c1 != c2).
inline double container_pair_traffic(const AppRequest& req, const IcmpAssignment& icmp, Index c1, Index c2) {
    req.container(c1);
    req.container(c2);
    if (c1 == c2) throw std::invalid_argument("container_pair_traffic needs two distinct containers");
    double sum = 0.0;
    for (std::size_t i = 0; i < icmp.size(); ++i) {
        if (icmp.target_of[i] != c1) continue;
        const Index v = req.instances()[i].component;
        for (Index e : req.out_edges(v)) {
            const Index dst = req.edges()[static_cast<std::size_t>(e)].dst;
            for (Index j : req.instances_of(dst)) {
                if (icmp.target_of[static_cast<std::size_t>(j)] == c2) sum += req.edge_pair_rate(e);
            }
        }
    }
    return sum;
}

/// T(X): traffic over all ordered pairs of distinct containers. Unmapped
/// instances contribute nothing.
inline double cross_container_traffic(const AppRequest& req, const IcmpAssignment& icmp) {
    const std::size_t nc = req.container_count();
    const auto counts = detail::component_counts(req, icmp);
    std::vector<int> placed(req.component_count(), 0);
    for (std::size_t v = 0; v < req.component_count(); ++v) {
        for (std::size_t c = 0; c < nc; ++c) placed[v] += counts[v * nc + c];
    }
    double total = 0.0;
    for (std::size_t e = 0; e < req.edges().size(); ++e) {
        const auto src = static_cast<std::size_t>(req.edges()[e].src);
        const auto dst = static_cast<std::size_t>(req.edges()[e].dst);
        long same = 0;
        for (std::size_t c = 0; c < nc; ++c) same += static_cast<long>(counts[src * nc + c]) * counts[dst * nc + c];
        const long pairs = static_cast<long>(placed[src]) * placed[dst] - same;
        total += req.edge_pair_rate(static_cast<Index>(e)) * static_cast<double>(pairs);
    }
    return total;
}

/// Traffic between instances sharing a container (complements T(X)).
inline double intra_container_traffic(const AppRequest& req, const IcmpAssignment& icmp) {
    const std::size_t nc = req.container_count();
    const auto counts = detail::component_counts(req, icmp);
    double total = 0.0;
    for (std::size_t e = 0; e < req.edges().size(); ++e) {
        const auto src = static_cast<std::size_t>(req.edges()[e].src);
        const auto dst = static_cast<std::size_t>(req.edges()[e].dst);
        long same = 0;
        for (std::size_t c = 0; c < nc; ++c) same += static_cast<long>(counts[src * nc + c]) * counts[dst * nc + c];
        total += req.edge_pair_rate(static_cast<Index>(e)) * static_cast<double>(same);
    }
    return total;
}

/// U(X): number of containers hosting at least one instance.
inline std::size_t container_utilization(const AppRequest& req, const IcmpAssignment& icmp) {
    std::vector<bool> used(req.container_count(), false);
    for (Index c : icmp.target_of) {
        if (c != kUnassigned) used[static_cast<std::size_t>(c)] = true;
    }
    std::size_t n = 0;
    for (bool u : used) n += u ? 1 : 0;
    return n;
}

inline double icmp_objective(const AppRequest& req, const IcmpAssignment& icmp, const ObjectiveConfig& cfg) {
    return cfg.alpha * cross_container_traffic(req, icmp) +
           (1.0 - cfg.alpha) * static_cast<double>(container_utilization(req, icmp));
}

/// W_{s1,s2}: hop-weighted traffic from containers on s1 to containers on s2.
inline double csmp_pair_cost(const ClusterState& state, const AppRequest& req, const IcmpAssignment& icmp,
                             const CsmpAssignment& csmp, Index s1, Index s2) {
    const double theta = state.hop_cost(s1, s2);
    if (theta == 0.0) return 0.0;
    const ContainerTraffic traffic(req, icmp);
    double sum = 0.0;
    for (std::size_t c1 = 0; c1 < csmp.size(); ++c1) {
        if (csmp.target_of[c1] != s1) continue;
        for (std::size_t c2 = 0; c2 < csmp.size(); ++c2) {
            if (c1 == c2 || csmp.target_of[c2] != s2) continue;
            sum += theta * traffic(static_cast<Index>(c1), static_cast<Index>(c2));
        }
    }
    return sum;
}

/// W(Y) for a precomputed traffic matrix.
inline double csmp_objective(const ClusterState& state, const ContainerTraffic& traffic, const CsmpAssignment& csmp) {
    double sum = 0.0;
    for (std::size_t c1 = 0; c1 < csmp.size(); ++c1) {
        const Index s1 = csmp.target_of[c1];
        if (s1 == kUnassigned) continue;
        for (std::size_t c2 = 0; c2 < csmp.size(); ++c2) {
            const Index s2 = csmp.target_of[c2];
            if (c1 == c2 || s2 == kUnassigned) continue;
            sum += state.hop_cost(s1, s2) * traffic(static_cast<Index>(c1), static_cast<Index>(c2));
        }
    }
    return sum;
}

/// W(Y): sum of csmp_pair_cost over all ordered server pairs.
inline double csmp_objective(const ClusterState& state, const AppRequest& req, const IcmpAssignment& icmp,
                             const CsmpAssignment& csmp) {
    return csmp_objective(state, ContainerTraffic(req, icmp), csmp);
}

/// Objective change from mapping unmapped instance i into container c.
/// Costs O(instances of neighbouring components).
inline double icmp_delta(const AppRequest& req, const IcmpAssignment& partial, Index i, Index c,
                         const ObjectiveConfig& cfg) {
    const auto& inst = req.instance(i);
    req.container(c);
    if (partial.is_mapped(i)) throw std::invalid_argument("instance " + std::to_string(i) + " is already mapped");
    ResourceVector load = inst.demand;
    bool occupied = false;
    for (std::size_t j = 0; j < partial.size(); ++j) {
        if (partial.target_of[j] == c) {
            load += req.instances()[j].demand;
            occupied = true;
        }
    }
    if (!load.fits_within(req.container(c).capacity)) {
        throw std::invalid_argument("instance " + std::to_string(i) + " does not fit container " + std::to_string(c));
    }

    double traffic = 0.0;
    auto add_neighbours = [&](Index e, Index other) {
        for (Index j : req.instances_of(other)) {
            const Index cj = partial.target_of[static_cast<std::size_t>(j)];
            if (cj != kUnassigned && cj != c) traffic += req.edge_pair_rate(e);
        }
    };
    for (Index e : req.out_edges(inst.component)) add_neighbours(e, req.edges()[static_cast<std::size_t>(e)].dst);
    for (Index e : req.in_edges(inst.component)) add_neighbours(e, req.edges()[static_cast<std::size_t>(e)].src);

    return cfg.alpha * traffic + (1.0 - cfg.alpha) * (occupied ? 0.0 : 1.0);
}

/// Cost change from mapping unmapped container c onto server s, given the
/// request's container traffic matrix. Costs O(containers).
inline double csmp_delta(const ClusterState& state, const AppRequest& req, const ContainerTraffic& traffic,
                         const CsmpAssignment& partial, Index c, Index s) {
    req.container(c);
    if (s < 0 || static_cast<std::size_t>(s) >= state.server_count()) {
        throw std::invalid_argument("unknown server id " + std::to_string(s));
    }
    if (partial.is_mapped(c)) throw std::invalid_argument("container " + std::to_string(c) + " is already mapped");
    ResourceVector load = req.container(c).capacity;
    double delta = 0.0;
    for (std::size_t other = 0; other < partial.size(); ++other) {
        const Index so = partial.target_of[other];
        if (so == kUnassigned) continue;
        if (so == s) load += req.containers()[other].capacity;
        delta += state.hop_cost(s, so) * traffic.both_ways(c, static_cast<Index>(other));
    }
    if (!load.fits_within(state.free(s))) {
        throw std::invalid_argument("container " + std::to_string(c) + " does not fit server " + std::to_string(s));
    }
    return delta;
}

inline double csmp_delta(const ClusterState& state, const AppRequest& req, const IcmpAssignment& icmp,
                         const CsmpAssignment& partial, Index c, Index s) {
    return csmp_delta(state, req, ContainerTraffic(req, icmp), partial, c, s);
}

}  // namespace streamplace
