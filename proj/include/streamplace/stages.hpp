#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "streamplace/mcts.hpp"
#include "streamplace/model.hpp"
#include "streamplace/objectives.hpp"

namespace streamplace {

namespace detail {

inline bool fits_flat(const double* load, const ResourceVector& add, const ResourceVector& bound) {
    for (std::size_t k = 0; k < add.dims(); ++k) {
        if (load[k] + add[k] > bound[k] + kTolerance) return false;
    }
    return true;
}

inline void erase_sorted(std::vector<Index>& v, Index x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it != v.end() && *it == x) v.erase(it);
}

}  // namespace detail

/// Instance-to-container placement as a sequential decision process.
/// State keeps per-(component, container) counts so that traffic and
/// container-count deltas cost O(degree).
class IcmpStage {
public:
    struct State {
        std::vector<Index> container_of;
        std::vector<Index> unplaced;  // sorted
        std::vector<double> load;     // [container][dim]
        std::vector<int> counts;      // [component][container]
        std::vector<int> placed;      // per component
        std::vector<int> occupancy;   // per container
        double traffic = 0.0;
        int used = 0;
    };

    IcmpStage(const AppRequest& req, ObjectiveConfig cfg) : req_(&req), cfg_(cfg) {}

    const AppRequest& request() const noexcept { return *req_; }
    const ObjectiveConfig& objective_config() const noexcept { return cfg_; }
    std::size_t item_count() const noexcept { return req_->instance_count(); }

    State initial_state() const {
        State s;
        const std::size_t ni = req_->instance_count();
        const std::size_t nc = req_->container_count();
        s.container_of.assign(ni, kUnassigned);
        s.unplaced.resize(ni);
        for (std::size_t i = 0; i < ni; ++i) s.unplaced[i] = static_cast<Index>(i);
        s.load.assign(nc * req_->dims(), 0.0);
        s.counts.assign(req_->component_count() * nc, 0);
        s.placed.assign(req_->component_count(), 0);
        s.occupancy.assign(nc, 0);
        return s;
    }

    bool fits(const State& s, Index i, Index c) const {
        const std::size_t dims = req_->dims();
        return detail::fits_flat(&s.load[static_cast<std::size_t>(c) * dims], req_->instances()[static_cast<std::size_t>(i)].demand,
                                 req_->containers()[static_cast<std::size_t>(c)].capacity);
    }

    bool scan(const State& s, std::vector<Action>& out) const {
        out.clear();
        const auto nc = static_cast<Index>(req_->container_count());
        bool every_item_has_target = true;
        for (Index i : s.unplaced) {
            bool any = false;
            for (Index c = 0; c < nc; ++c) {
                if (fits(s, i, c)) {
                    out.push_back({i, c});
                    any = true;
                }
            }
            every_item_has_target = every_item_has_target && any;
        }
        return every_item_has_target;
    }

    /// Cross-container traffic added by mapping instance i into container c.
    double traffic_delta(const State& s, Index i, Index c) const {
        const std::size_t nc = req_->container_count();
        const Index v = req_->instances()[static_cast<std::size_t>(i)].component;
        double delta = 0.0;
        for (Index e : req_->out_edges(v)) {
            const auto u = static_cast<std::size_t>(req_->edges()[static_cast<std::size_t>(e)].dst);
            delta += req_->edge_pair_rate(e) * (s.placed[u] - s.counts[u * nc + static_cast<std::size_t>(c)]);
        }
        for (Index e : req_->in_edges(v)) {
            const auto u = static_cast<std::size_t>(req_->edges()[static_cast<std::size_t>(e)].src);
            delta += req_->edge_pair_rate(e) * (s.placed[u] - s.counts[u * nc + static_cast<std::size_t>(c)]);
        }
        return delta;
    }

    double delta(const State& s, Action a) const {
        const double opens = s.occupancy[static_cast<std::size_t>(a.target)] == 0 ? 1.0 : 0.0;
        return cfg_.alpha * traffic_delta(s, a.item, a.target) + (1.0 - cfg_.alpha) * opens;
    }

    void apply(State& s, Action a) const {
        const auto i = static_cast<std::size_t>(a.item);
        const auto c = static_cast<std::size_t>(a.target);
        const std::size_t nc = req_->container_count();
        const std::size_t dims = req_->dims();
        const auto v = static_cast<std::size_t>(req_->instances()[i].component);
        s.traffic += traffic_delta(s, a.item, a.target);
        if (s.occupancy[c]++ == 0) ++s.used;
        s.container_of[i] = a.target;
        detail::erase_sorted(s.unplaced, a.item);
        const auto& demand = req_->instances()[i].demand;
        for (std::size_t k = 0; k < dims; ++k) s.load[c * dims + k] += demand[k];
        ++s.counts[v * nc + c];
        ++s.placed[v];
    }

    bool is_complete(const State& s) const noexcept { return s.unplaced.empty(); }

    double objective(const State& s) const noexcept {
        return cfg_.alpha * s.traffic + (1.0 - cfg_.alpha) * static_cast<double>(s.used);
    }

    /// Random unplaced instance into the feasible container with the smallest
    /// objective delta (ties: smallest container id).
    std::optional<Action> greedy_action(const State& s, Rng& rng) const {
        if (s.unplaced.empty()) return std::nullopt;
        const Index i = s.unplaced[rng.uniform_index(s.unplaced.size())];
        std::optional<Action> best;
        double best_delta = std::numeric_limits<double>::infinity();
        const auto nc = static_cast<Index>(req_->container_count());
        for (Index c = 0; c < nc; ++c) {
            if (!fits(s, i, c)) continue;
            const double d = delta(s, {i, c});
            if (d < best_delta - kTolerance) {
                best_delta = d;
                best = Action{i, c};
            }
        }
        return best;
    }

    /// 1 when the target container already hosts an instance of a component
    /// adjacent to the instance's component in the stream graph.
    int expansion_score(const State& s, Action a) const {
        const std::size_t nc = req_->container_count();
        const auto c = static_cast<std::size_t>(a.target);
        const Index v = req_->instances()[static_cast<std::size_t>(a.item)].component;
        for (Index e : req_->out_edges(v)) {
            const auto u = static_cast<std::size_t>(req_->edges()[static_cast<std::size_t>(e)].dst);
            if (s.counts[u * nc + c] > 0) return 1;
        }
        for (Index e : req_->in_edges(v)) {
            const auto u = static_cast<std::size_t>(req_->edges()[static_cast<std::size_t>(e)].src);
            if (s.counts[u * nc + c] > 0) return 1;
        }
        return 0;
    }

    /// Upper bound on any leaf cost: alpha * sum(w) + (1 - alpha) * |C|.
    double prior_cost() const noexcept {
        return cfg_.alpha * req_->total_rate() + (1.0 - cfg_.alpha) * static_cast<double>(req_->container_count());
    }

    IcmpAssignment to_assignment(const State& s) const {
        IcmpAssignment a = IcmpAssignment::empty_for(*req_);
        a.target_of = s.container_of;
        return a;
    }

private:
    const AppRequest* req_;
    ObjectiveConfig cfg_;
};

/// Container-to-server placement for one (reduced) request against the
/// current cluster state.
class CsmpStage {
public:
    struct State {
        std::vector<Index> server_of;
        std::vector<Index> unplaced;  // sorted
        std::vector<double> extra;    // [server][dim] newly placed capacity
        double cost = 0.0;
    };

    CsmpStage(const ClusterState& cluster, const AppRequest& req, const IcmpAssignment& icmp)
        : cluster_(&cluster), req_(&req), traffic_(req, icmp) {}

    const ContainerTraffic& traffic() const noexcept { return traffic_; }
    std::size_t item_count() const noexcept { return req_->container_count(); }

    State initial_state() const {
        State s;
        const std::size_t nc = req_->container_count();
        s.server_of.assign(nc, kUnassigned);
        s.unplaced.resize(nc);
        for (std::size_t c = 0; c < nc; ++c) s.unplaced[c] = static_cast<Index>(c);
        s.extra.assign(cluster_->server_count() * cluster_->dims(), 0.0);
        return s;
    }

    bool fits(const State& s, Index c, Index srv) const {
        const std::size_t dims = cluster_->dims();
        return detail::fits_flat(&s.extra[static_cast<std::size_t>(srv) * dims], req_->containers()[static_cast<std::size_t>(c)].capacity,
                                 cluster_->free(srv));
    }

    bool scan(const State& s, std::vector<Action>& out) const {
        out.clear();
        const auto ns = static_cast<Index>(cluster_->server_count());
        bool every_item_has_target = true;
        for (Index c : s.unplaced) {
            bool any = false;
            for (Index srv = 0; srv < ns; ++srv) {
                if (fits(s, c, srv)) {
                    out.push_back({c, srv});
                    any = true;
                }
            }
            every_item_has_target = every_item_has_target && any;
        }
        return every_item_has_target;
    }

    double delta(const State& s, Action a) const {
        double d = 0.0;
        for (std::size_t other = 0; other < s.server_of.size(); ++other) {
            const Index so = s.server_of[other];
            if (so == kUnassigned) continue;
            d += cluster_->hop_cost(a.target, so) * traffic_.both_ways(a.item, static_cast<Index>(other));
        }
        return d;
    }

    void apply(State& s, Action a) const {
        s.cost += delta(s, a);
        s.server_of[static_cast<std::size_t>(a.item)] = a.target;
        detail::erase_sorted(s.unplaced, a.item);
        const std::size_t dims = cluster_->dims();
        const auto& cap = req_->containers()[static_cast<std::size_t>(a.item)].capacity;
        for (std::size_t k = 0; k < dims; ++k) s.extra[static_cast<std::size_t>(a.target) * dims + k] += cap[k];
    }

    bool is_complete(const State& s) const noexcept { return s.unplaced.empty(); }
    double objective(const State& s) const noexcept { return s.cost; }

    /// Random unplaced container onto the feasible server with the smallest
    /// added cross-server cost (ties: smallest server id).
    std::optional<Action> greedy_action(const State& s, Rng& rng) const {
        if (s.unplaced.empty()) return std::nullopt;
        const Index c = s.unplaced[rng.uniform_index(s.unplaced.size())];
        std::optional<Action> best;
        double best_delta = std::numeric_limits<double>::infinity();
        const auto ns = static_cast<Index>(cluster_->server_count());
        for (Index srv = 0; srv < ns; ++srv) {
            if (!fits(s, c, srv)) continue;
            const double d = delta(s, {c, srv});
            if (d < best_delta - kTolerance) {
                best_delta = d;
                best = Action{c, srv};
            }
        }
        return best;
    }

    /// 1 when a container exchanging traffic with this one already sits on
    /// the target server.
    int expansion_score(const State& s, Action a) const {
        for (std::size_t other = 0; other < s.server_of.size(); ++other) {
            if (s.server_of[other] == a.target && traffic_.both_ways(a.item, static_cast<Index>(other)) > 0.0) return 1;
        }
        return 0;
    }

    /// Upper bound on any leaf cost: cross-container traffic times max hop cost.
    double prior_cost() const noexcept { return traffic_.cross_total() * cluster_->max_hop_cost(); }

    CsmpAssignment to_assignment(const State& s) const {
        CsmpAssignment a = CsmpAssignment::empty_for(*req_);
        a.target_of = s.server_of;
        return a;
    }

private:
    const ClusterState* cluster_;
    const AppRequest* req_;
    ContainerTraffic traffic_;
};

static_assert(PlacementStage<IcmpStage>);
static_assert(PlacementStage<CsmpStage>);

template <typename Assignment>
struct StageResult {
    Assignment assignment;
    double objective = 0.0;
    SearchStats stats;
};

/// MCTS placement of every instance of `req` into its containers.
inline StageResult<IcmpAssignment> run_mcts_icmp(const AppRequest& req, const ObjectiveConfig& objective,
                                                 const MctsConfig& cfg, std::uint64_t seed) {
    const IcmpStage stage(req, objective);
    Search<IcmpStage> search(stage, cfg, seed);
    search.run();
    return {stage.to_assignment(search.root_state()), stage.objective(search.root_state()), search.stats()};
}

/// MCTS placement of every container of `req` onto cluster servers.
inline StageResult<CsmpAssignment> run_mcts_csmp(const ClusterState& cluster, const AppRequest& req,
                                                 const IcmpAssignment& icmp, const MctsConfig& cfg,
                                                 std::uint64_t seed) {
    const CsmpStage stage(cluster, req, icmp);
    Search<CsmpStage> search(stage, cfg, seed);
    search.run();
    return {stage.to_assignment(search.root_state()), stage.objective(search.root_state()), search.stats()};
}

}  // namespace streamplace
