#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "streamplace/mcts.hpp"
#include "streamplace/model.hpp"
#include "streamplace/objectives.hpp"
#include "streamplace/stages.hpp"

namespace streamplace {

namespace detail {

inline PlacementFailure baseline_failure(const char* scheme, const std::string& what, std::size_t placed) {
    return PlacementFailure(std::string(scheme) + ": " + what, placed, placed);
}

}  // namespace detail

/// First-fit over active containers sorted by descending available resources
/// (lexicographic over dimensions, then container id). A new container is
/// activated only when no active one fits.
inline IcmpAssignment ffd_icmp(const AppRequest& req) {
    IcmpAssignment out = IcmpAssignment::empty_for(req);
    std::vector<ResourceVector> available;
    std::vector<Index> active;
    for (const auto& c : req.containers()) available.push_back(c.capacity);
    std::size_t next_unused = 0;

    for (const auto& inst : req.instances()) {
        std::sort(active.begin(), active.end(), [&](Index a, Index b) {
            const auto& va = available[static_cast<std::size_t>(a)].values();
            const auto& vb = available[static_cast<std::size_t>(b)].values();
            if (va != vb) return std::lexicographical_compare(vb.begin(), vb.end(), va.begin(), va.end());
            return a < b;
        });
        Index chosen = kUnassigned;
        for (Index c : active) {
            if (inst.demand.fits_within(available[static_cast<std::size_t>(c)])) {
                chosen = c;
                break;
            }
        }
        if (chosen == kUnassigned) {
            if (next_unused == req.container_count() ||
                !inst.demand.fits_within(available[next_unused])) {
                throw detail::baseline_failure("ffd", "no container can host instance " + std::to_string(inst.id),
                                               out.mapped_count());
            }
            chosen = static_cast<Index>(next_unused++);
            active.push_back(chosen);
        }
        available[static_cast<std::size_t>(chosen)] -= inst.demand;
        out.assign(inst.id, chosen);
    }
    return out;
}

/// Components in breadth-first order over reversed streams, starting from
/// all sinks at once (a virtual root preceding every sink).
inline std::vector<Index> reverse_bfs_component_order(const AppRequest& req) {
    const std::size_t m = req.component_count();
    std::vector<bool> seen(m, false);
    std::deque<Index> queue;
    for (std::size_t v = 0; v < m; ++v) {
        if (req.out_edges(static_cast<Index>(v)).empty()) {
            queue.push_back(static_cast<Index>(v));
            seen[v] = true;
        }
    }
    std::vector<Index> order;
    while (!queue.empty()) {
        const Index v = queue.front();
        queue.pop_front();
        order.push_back(v);
        std::vector<Index> preds;
        for (Index e : req.in_edges(v)) preds.push_back(req.edges()[static_cast<std::size_t>(e)].src);
        std::sort(preds.begin(), preds.end());
        for (Index u : preds) {
            if (!seen[static_cast<std::size_t>(u)]) {
                seen[static_cast<std::size_t>(u)] = true;
                queue.push_back(u);
            }
        }
    }
    return order;
}

/// Each instance goes to the feasible container minimising added
/// cross-container traffic plus the Euclidean distance between its demand
/// and the container's available resources. The two terms are summed
/// unweighted.
inline IcmpAssignment r_heron_icmp(const AppRequest& req) {
    const IcmpStage stage(req, ObjectiveConfig(1.0));
    auto state = stage.initial_state();
    std::vector<ResourceVector> available;
    for (const auto& c : req.containers()) available.push_back(c.capacity);

    for (Index v : reverse_bfs_component_order(req)) {
        for (Index i : req.instances_of(v)) {
            const auto& demand = req.instances()[static_cast<std::size_t>(i)].demand;
            Index chosen = kUnassigned;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < req.container_count(); ++c) {
                if (!demand.fits_within(available[c])) continue;
                const double score = stage.traffic_delta(state, i, static_cast<Index>(c)) +
                                     euclidean_distance(demand, available[c]);
                if (score < best - kTolerance) {
                    best = score;
                    chosen = static_cast<Index>(c);
                }
            }
            if (chosen == kUnassigned) {
                throw detail::baseline_failure("r-heron", "no container can host instance " + std::to_string(i),
                                               req.instance_count() - state.unplaced.size());
            }
            stage.apply(state, {i, chosen});
            available[static_cast<std::size_t>(chosen)] -= demand;
        }
    }
    return stage.to_assignment(state);
}

/// Total (incoming + outgoing) per-instance stream rate.
inline double instance_incident_rate(const AppRequest& req, Index i) {
    const Index v = req.instance(i).component;
    double sum = 0.0;
    for (Index e : req.out_edges(v)) {
        sum += req.edge_pair_rate(e) * req.component(req.edges()[static_cast<std::size_t>(e)].dst).parallelism;
    }
    for (Index e : req.in_edges(v)) {
        sum += req.edge_pair_rate(e) * req.component(req.edges()[static_cast<std::size_t>(e)].src).parallelism;
    }
    return sum;
}

/// Instances by descending incident rate, each into the feasible container
/// with minimum added cross-container traffic (ties: smallest id).
inline IcmpAssignment t_heron_icmp(const AppRequest& req) {
    std::vector<Index> order(req.instance_count());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> rate(order.size());
    for (Index i : order) rate[static_cast<std::size_t>(i)] = instance_incident_rate(req, i);
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return rate[static_cast<std::size_t>(a)] > rate[static_cast<std::size_t>(b)]; });

    const IcmpStage stage(req, ObjectiveConfig(1.0));
    auto state = stage.initial_state();
    for (Index i : order) {
        Index chosen = kUnassigned;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < req.container_count(); ++c) {
            if (!stage.fits(state, i, static_cast<Index>(c))) continue;
            const double d = stage.traffic_delta(state, i, static_cast<Index>(c));
            if (d < best - kTolerance) {
                best = d;
                chosen = static_cast<Index>(c);
            }
        }
        if (chosen == kUnassigned) {
            throw detail::baseline_failure("t-heron", "no container can host instance " + std::to_string(i),
                                           req.instance_count() - state.unplaced.size());
        }
        stage.apply(state, {i, chosen});
    }
    return stage.to_assignment(state);
}

/// Containers in id order, each onto the feasible server whose free
/// resources after placement have the smallest Euclidean norm.
inline CsmpAssignment best_fit_csmp(const ClusterState& cluster, const AppRequest& req) {
    CsmpAssignment out = CsmpAssignment::empty_for(req);
    std::vector<ResourceVector> free;
    for (std::size_t s = 0; s < cluster.server_count(); ++s) free.push_back(cluster.free(static_cast<Index>(s)));

    for (const auto& cont : req.containers()) {
        Index chosen = kUnassigned;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < free.size(); ++s) {
            if (!cont.capacity.fits_within(free[s])) continue;
            const double residual = (free[s] - cont.capacity).euclidean_norm();
            if (residual < best - kTolerance) {
                best = residual;
                chosen = static_cast<Index>(s);
            }
        }
        if (chosen == kUnassigned) {
            throw detail::baseline_failure("best-fit", "no server can host container " + std::to_string(cont.id),
                                           out.mapped_count());
        }
        free[static_cast<std::size_t>(chosen)] -= cont.capacity;
        out.assign(cont.id, chosen);
    }
    return out;
}

}  // namespace streamplace
