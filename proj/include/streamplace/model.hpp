#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "streamplace/resources.hpp"

namespace streamplace {

using Index = std::int32_t;
inline constexpr Index kUnassigned = -1;

/// Raised when a caller hands an operation inputs that break its contract
/// (e.g. committing an infeasible placement).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct Server {
    Index id = 0;
    ResourceVector capacity;
};

struct Component {
    Index id = 0;
    int parallelism = 1;
};

struct StreamEdge {
    Index src = 0;
    Index dst = 0;
    double rate = 0.0;
};

struct Instance {
    Index id = 0;
    Index component = 0;
    ResourceVector demand;
};

struct Container {
    Index id = 0;
    ResourceVector capacity;
};

/// One application request: a DAG of components, its expanded instances and
/// the containers it may use. Immutable after construction; the constructor
/// validates structure and builds the lookup tables used by the objectives.
class AppRequest {
public:
    AppRequest() = default;

    AppRequest(Index id, std::vector<Component> components, std::vector<StreamEdge> edges,
               std::vector<Instance> instances, std::vector<Container> containers)
        : id_(id),
          components_(std::move(components)),
          edges_(std::move(edges)),
          instances_(std::move(instances)),
          containers_(std::move(containers)) {
        validate_and_index();
    }

    Index id() const noexcept { return id_; }
    const std::vector<Component>& components() const noexcept { return components_; }
    const std::vector<StreamEdge>& edges() const noexcept { return edges_; }
    const std::vector<Instance>& instances() const noexcept { return instances_; }
    const std::vector<Container>& containers() const noexcept { return containers_; }

    std::size_t component_count() const noexcept { return components_.size(); }
    std::size_t instance_count() const noexcept { return instances_.size(); }
    std::size_t container_count() const noexcept { return containers_.size(); }
    std::size_t dims() const noexcept { return dims_; }

    const Instance& instance(Index i) const { return instances_.at(checked(i, instances_.size(), "instance")); }
    const Container& container(Index c) const { return containers_.at(checked(c, containers_.size(), "container")); }
    const Component& component(Index v) const { return components_.at(checked(v, components_.size(), "component")); }

    const std::vector<Index>& instances_of(Index v) const { return instances_by_component_[static_cast<std::size_t>(v)]; }
    const std::vector<Index>& out_edges(Index v) const { return out_edges_[static_cast<std::size_t>(v)]; }
    const std::vector<Index>& in_edges(Index v) const { return in_edges_[static_cast<std::size_t>(v)]; }

    /// Index into edges() of the stream v1 -> v2, or kUnassigned.
    Index edge_between(Index v1, Index v2) const {
        return edge_lookup_[static_cast<std::size_t>(v1) * components_.size() + static_cast<std::size_t>(v2)];
    }

    /// Rate of stream e between one instance pair: w(e) / (p(src) p(dst)).
    double edge_pair_rate(Index e) const { return edge_pair_rate_[static_cast<std::size_t>(e)]; }

    double total_rate() const noexcept { return total_rate_; }

    /// Common container capacity (all containers of one request are identical).
    const ResourceVector& container_capacity() const {
        if (containers_.empty()) throw std::logic_error("request has no containers");
        return containers_.front().capacity;
    }

    /// Components in a topological order of the stream DAG.
    const std::vector<Index>& topological_order() const noexcept { return topo_order_; }

private:
    static std::size_t checked(Index v, std::size_t n, const char* what) {
        if (v < 0 || static_cast<std::size_t>(v) >= n) {
            throw std::invalid_argument(std::string("unknown ") + what + " id " + std::to_string(v));
        }
        return static_cast<std::size_t>(v);
    }

    void validate_and_index();

    Index id_ = 0;
    std::vector<Component> components_;
    std::vector<StreamEdge> edges_;
    std::vector<Instance> instances_;
    std::vector<Container> containers_;

    std::size_t dims_ = 0;
    std::vector<std::vector<Index>> instances_by_component_;
    std::vector<std::vector<Index>> out_edges_;
    std::vector<std::vector<Index>> in_edges_;
    std::vector<Index> edge_lookup_;
    std::vector<double> edge_pair_rate_;
    std::vector<Index> topo_order_;
    double total_rate_ = 0.0;
};

inline void AppRequest::validate_and_index() {
    const std::size_t m = components_.size();
    for (std::size_t v = 0; v < m; ++v) {
        if (components_[v].id != static_cast<Index>(v)) {
            throw std::invalid_argument("component ids must be 0..n-1 in order");
        }
        if (components_[v].parallelism < 1) {
            throw std::invalid_argument("component " + std::to_string(v) + " has parallelism < 1");
        }
    }

    dims_ = 0;
    if (!instances_.empty()) dims_ = instances_.front().demand.dims();
    else if (!containers_.empty()) dims_ = containers_.front().capacity.dims();

    edge_lookup_.assign(m * m, kUnassigned);
    out_edges_.assign(m, {});
    in_edges_.assign(m, {});
    edge_pair_rate_.clear();
    total_rate_ = 0.0;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const auto& edge = edges_[e];
        if (edge.src < 0 || edge.dst < 0 || static_cast<std::size_t>(edge.src) >= m ||
            static_cast<std::size_t>(edge.dst) >= m) {
            throw std::invalid_argument("edge " + std::to_string(e) + " references an unknown component");
        }
        if (edge.src == edge.dst) throw std::invalid_argument("self-loop stream on component " + std::to_string(edge.src));
        if (!(edge.rate >= 0.0)) throw std::invalid_argument("negative stream rate on edge " + std::to_string(e));
        auto& slot = edge_lookup_[static_cast<std::size_t>(edge.src) * m + static_cast<std::size_t>(edge.dst)];
        if (slot != kUnassigned) throw std::invalid_argument("duplicate stream between components");
        slot = static_cast<Index>(e);
        out_edges_[static_cast<std::size_t>(edge.src)].push_back(static_cast<Index>(e));
        in_edges_[static_cast<std::size_t>(edge.dst)].push_back(static_cast<Index>(e));
        total_rate_ += edge.rate;
    }

    // Kahn's algorithm; smallest ready id first so the order is canonical.
    std::vector<std::size_t> indegree(m, 0);
    for (const auto& edge : edges_) ++indegree[static_cast<std::size_t>(edge.dst)];
    topo_order_.clear();
    std::vector<Index> ready;
    for (std::size_t v = 0; v < m; ++v) {
        if (indegree[v] == 0) ready.push_back(static_cast<Index>(v));
    }
    while (!ready.empty()) {
        auto it = std::min_element(ready.begin(), ready.end());
        const Index v = *it;
        ready.erase(it);
        topo_order_.push_back(v);
        for (Index e : out_edges_[static_cast<std::size_t>(v)]) {
            const auto dst = static_cast<std::size_t>(edges_[static_cast<std::size_t>(e)].dst);
            if (--indegree[dst] == 0) ready.push_back(static_cast<Index>(dst));
        }
    }
    if (topo_order_.size() != m) throw std::invalid_argument("stream graph contains a directed cycle");

    instances_by_component_.assign(m, {});
    for (std::size_t i = 0; i < instances_.size(); ++i) {
        const auto& inst = instances_[i];
        if (inst.id != static_cast<Index>(i)) throw std::invalid_argument("instance ids must be 0..n-1 in order");
        if (inst.component < 0 || static_cast<std::size_t>(inst.component) >= m) {
            throw std::invalid_argument("instance " + std::to_string(i) + " references an unknown component");
        }
        if (inst.demand.dims() != dims_) throw std::invalid_argument("instance demands differ in dimension");
        if (!inst.demand.nonnegative()) throw std::invalid_argument("instance " + std::to_string(i) + " has a negative demand");
        instances_by_component_[static_cast<std::size_t>(inst.component)].push_back(static_cast<Index>(i));
    }
    for (std::size_t v = 0; v < m; ++v) {
        if (instances_by_component_[v].size() != static_cast<std::size_t>(components_[v].parallelism)) {
            throw std::invalid_argument("component " + std::to_string(v) + " does not have exactly p(v) instances");
        }
    }

    for (std::size_t c = 0; c < containers_.size(); ++c) {
        const auto& cont = containers_[c];
        if (cont.id != static_cast<Index>(c)) throw std::invalid_argument("container ids must be 0..n-1 in order");
        if (cont.capacity.dims() != dims_) throw std::invalid_argument("container capacity has the wrong dimension");
        if (!cont.capacity.strictly_positive()) throw std::invalid_argument("container capacity must be strictly positive");
        if (!(cont.capacity == containers_.front().capacity)) {
            throw std::invalid_argument("containers of one request must share identical capacity");
        }
    }

    edge_pair_rate_.resize(edges_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const auto& edge = edges_[e];
        const double p1 = components_[static_cast<std::size_t>(edge.src)].parallelism;
        const double p2 = components_[static_cast<std::size_t>(edge.dst)].parallelism;
        edge_pair_rate_[e] = edge.rate / (p1 * p2);
    }
}

/// Builds a request from per-component demands: component v expands into
/// p(v) instances sharing demand d(v); `container_count` identical containers.
inline AppRequest expand_request(Index id, const std::vector<int>& parallelism,
                                 const std::vector<ResourceVector>& component_demand,
                                 std::vector<StreamEdge> edges, std::size_t container_count,
                                 const ResourceVector& container_capacity) {
    if (parallelism.size() != component_demand.size()) {
        throw std::invalid_argument("parallelism and demand lists differ in length");
    }
    std::vector<Component> components;
    std::vector<Instance> instances;
    for (std::size_t v = 0; v < parallelism.size(); ++v) {
        components.push_back({static_cast<Index>(v), parallelism[v]});
        for (int k = 0; k < parallelism[v]; ++k) {
            instances.push_back({static_cast<Index>(instances.size()), static_cast<Index>(v), component_demand[v]});
        }
    }
    std::vector<Container> containers;
    for (std::size_t c = 0; c < container_count; ++c) containers.push_back({static_cast<Index>(c), container_capacity});
    return AppRequest(id, std::move(components), std::move(edges), std::move(instances), std::move(containers));
}

/// Directed per-instance rate w(i1, i2) under evenly spread streams.
inline double instance_traffic_rate(const AppRequest& req, Index i1, Index i2) {
    const Index v1 = req.instance(i1).component;
    const Index v2 = req.instance(i2).component;
    if (v1 == v2) return 0.0;
    const Index e = req.edge_between(v1, v2);
    return e == kUnassigned ? 0.0 : req.edge_pair_rate(e);
}

/// Sparse 0/1 mapping matrix stored as item -> target (kUnassigned if unmapped).
struct Mapping {
    Index request_id = 0;
    std::vector<Index> target_of;

    Mapping() = default;
    Mapping(Index request, std::size_t items) : request_id(request), target_of(items, kUnassigned) {}

    std::size_t size() const noexcept { return target_of.size(); }
    bool is_mapped(Index item) const { return target_of.at(static_cast<std::size_t>(item)) != kUnassigned; }
    Index operator[](Index item) const { return target_of.at(static_cast<std::size_t>(item)); }
    void assign(Index item, Index target) { target_of.at(static_cast<std::size_t>(item)) = target; }
    void unassign(Index item) { target_of.at(static_cast<std::size_t>(item)) = kUnassigned; }

    std::size_t mapped_count() const noexcept {
        return static_cast<std::size_t>(std::count_if(target_of.begin(), target_of.end(), [](Index t) { return t != kUnassigned; }));
    }
    bool complete() const noexcept { return mapped_count() == target_of.size(); }

    friend bool operator==(const Mapping&, const Mapping&) = default;
};

/// Instance -> container decisions (nonzero entries of X).
struct IcmpAssignment : Mapping {
    using Mapping::Mapping;
    static IcmpAssignment empty_for(const AppRequest& req) { return IcmpAssignment(req.id(), req.instance_count()); }
};

/// Container -> server decisions (nonzero entries of Y).
struct CsmpAssignment : Mapping {
    using Mapping::Mapping;
    static CsmpAssignment empty_for(const AppRequest& req) { return CsmpAssignment(req.id(), req.container_count()); }
};

/// Cluster servers, hop-cost matrix and the containers already committed.
class ClusterState {
public:
    ClusterState() = default;

    ClusterState(std::vector<Server> servers, std::vector<double> hop_cost)
        : servers_(std::move(servers)), hop_cost_(std::move(hop_cost)) {
        const std::size_t n = servers_.size();
        if (hop_cost_.size() != n * n) throw std::invalid_argument("hop-cost matrix must be |S| x |S|");
        for (std::size_t s = 0; s < n; ++s) {
            if (servers_[s].id != static_cast<Index>(s)) throw std::invalid_argument("server ids must be 0..n-1 in order");
            if (!servers_[s].capacity.strictly_positive()) {
                throw std::invalid_argument("server " + std::to_string(s) + " capacity must be strictly positive");
            }
            if (servers_[s].capacity.dims() != servers_.front().capacity.dims()) {
                throw std::invalid_argument("server capacities differ in dimension");
            }
            if (hop_cost_[s * n + s] != 0.0) throw std::invalid_argument("hop-cost diagonal must be zero");
            for (std::size_t t = 0; t < n; ++t) {
                if (!(hop_cost_[s * n + t] >= 0.0)) throw std::invalid_argument("hop costs must be nonnegative");
                if (hop_cost_[s * n + t] != hop_cost_[t * n + s]) throw std::invalid_argument("hop-cost matrix must be symmetric");
            }
        }
        committed_.assign(n, {});
        free_.reserve(n);
        for (const auto& s : servers_) free_.push_back(s.capacity);
    }

    std::size_t server_count() const noexcept { return servers_.size(); }
    std::size_t dims() const noexcept { return servers_.empty() ? 0 : servers_.front().capacity.dims(); }
    const std::vector<Server>& servers() const noexcept { return servers_; }
    const Server& server(Index s) const { return servers_.at(static_cast<std::size_t>(s)); }

    double hop_cost(Index s1, Index s2) const {
        return hop_cost_[static_cast<std::size_t>(s1) * servers_.size() + static_cast<std::size_t>(s2)];
    }
    const std::vector<double>& hop_cost_matrix() const noexcept { return hop_cost_; }
    double max_hop_cost() const noexcept {
        return hop_cost_.empty() ? 0.0 : *std::max_element(hop_cost_.begin(), hop_cost_.end());
    }

    const std::vector<ResourceVector>& committed(Index s) const { return committed_.at(static_cast<std::size_t>(s)); }
    const ResourceVector& free(Index s) const { return free_.at(static_cast<std::size_t>(s)); }

    std::size_t committed_container_count() const noexcept {
        std::size_t n = 0;
        for (const auto& list : committed_) n += list.size();
        return n;
    }

private:
    friend ClusterState commit(const ClusterState&, const AppRequest&, const IcmpAssignment&, const CsmpAssignment&);

    std::vector<Server> servers_;
    std::vector<double> hop_cost_;
    std::vector<std::vector<ResourceVector>> committed_;
    std::vector<ResourceVector> free_;
};

enum class Violation {
    none,
    unknown_id,
    unmapped_item,
    container_capacity,
    server_capacity,
    oversized_instance,
};

inline const char* to_string(Violation v) {
    switch (v) {
        case Violation::none: return "none";
        case Violation::unknown_id: return "unknown_id";
        case Violation::unmapped_item: return "unmapped_item";
        case Violation::container_capacity: return "container_capacity";
        case Violation::server_capacity: return "server_capacity";
        case Violation::oversized_instance: return "oversized_instance";
    }
    return "unknown";
}

/// Feasibility verdict; carries the first violated constraint on failure.
struct Verdict {
    Violation violation = Violation::none;
    Index subject = kUnassigned;
    std::string detail;

    bool feasible() const noexcept { return violation == Violation::none; }
    explicit operator bool() const noexcept { return feasible(); }

    static Verdict ok() { return {}; }
    static Verdict fail(Violation v, Index subject, std::string detail) { return {v, subject, std::move(detail)}; }
};

/// Rejects requests with an instance that no container could ever hold.
inline Verdict check_intake(const AppRequest& req) {
    for (const auto& inst : req.instances()) {
        for (const auto& cont : req.containers()) {
            if (!inst.demand.fits_within(cont.capacity)) {
                return Verdict::fail(Violation::oversized_instance, inst.id,
                                     "instance " + std::to_string(inst.id) + " demand " + inst.demand.to_string() +
                                         " exceeds container capacity " + cont.capacity.to_string());
            }
        }
    }
    if (req.instance_count() > 0 && req.container_count() == 0) {
        return Verdict::fail(Violation::oversized_instance, kUnassigned, "request has instances but no containers");
    }
    return Verdict::ok();
}

/// Each instance in at most (partial) / exactly (complete) one container, and
/// per container the mapped demands fit its capacity.
inline Verdict validate_icmp(const AppRequest& req, const IcmpAssignment& a, bool partial) {
    if (a.size() != req.instance_count()) {
        return Verdict::fail(Violation::unknown_id, kUnassigned, "assignment size does not match instance count");
    }
    std::vector<ResourceVector> load(req.container_count(), ResourceVector(req.dims()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Index c = a.target_of[i];
        if (c == kUnassigned) {
            if (!partial) return Verdict::fail(Violation::unmapped_item, static_cast<Index>(i), "instance " + std::to_string(i) + " is unmapped");
            continue;
        }
        if (c < 0 || static_cast<std::size_t>(c) >= req.container_count()) {
            return Verdict::fail(Violation::unknown_id, static_cast<Index>(i), "instance " + std::to_string(i) + " maps to unknown container");
        }
        load[static_cast<std::size_t>(c)] += req.instances()[i].demand;
    }
    for (std::size_t c = 0; c < load.size(); ++c) {
        if (!load[c].fits_within(req.containers()[c].capacity)) {
            return Verdict::fail(Violation::container_capacity, static_cast<Index>(c),
                                 "container " + std::to_string(c) + " load " + load[c].to_string() + " exceeds capacity");
        }
    }
    return Verdict::ok();
}

/// Committed plus newly mapped container capacities fit every server.
inline Verdict validate_csmp(const ClusterState& state, const AppRequest& req, const CsmpAssignment& a, bool partial) {
    if (a.size() != req.container_count()) {
        return Verdict::fail(Violation::unknown_id, kUnassigned, "assignment size does not match container count");
    }
    std::vector<ResourceVector> extra(state.server_count(), ResourceVector(state.dims()));
    for (std::size_t c = 0; c < a.size(); ++c) {
        const Index s = a.target_of[c];
        if (s == kUnassigned) {
            if (!partial) return Verdict::fail(Violation::unmapped_item, static_cast<Index>(c), "container " + std::to_string(c) + " is unmapped");
            continue;
        }
        if (s < 0 || static_cast<std::size_t>(s) >= state.server_count()) {
            return Verdict::fail(Violation::unknown_id, static_cast<Index>(c), "container " + std::to_string(c) + " maps to unknown server");
        }
        extra[static_cast<std::size_t>(s)] += req.containers()[c].capacity;
    }
    for (std::size_t s = 0; s < extra.size(); ++s) {
        if (!extra[s].fits_within(state.free(static_cast<Index>(s)))) {
            return Verdict::fail(Violation::server_capacity, static_cast<Index>(s),
                                 "server " + std::to_string(s) + " cannot host " + extra[s].to_string() +
                                     " with free " + state.free(static_cast<Index>(s)).to_string());
        }
    }
    return Verdict::ok();
}

/// Applies a complete two-stage placement. Every mapped container must host
/// at least one instance (empty containers are eliminated beforehand).
inline ClusterState commit(const ClusterState& state, const AppRequest& req, const IcmpAssignment& icmp,
                           const CsmpAssignment& csmp) {
    if (auto v = validate_icmp(req, icmp, false); !v) throw ContractViolation("commit with infeasible ICMP: " + v.detail);
    if (auto v = validate_csmp(state, req, csmp, false); !v) throw ContractViolation("commit with infeasible CSMP: " + v.detail);
    std::vector<bool> used(req.container_count(), false);
    for (Index c : icmp.target_of) used[static_cast<std::size_t>(c)] = true;
    for (std::size_t c = 0; c < used.size(); ++c) {
        if (!used[c]) throw ContractViolation("commit with empty container " + std::to_string(c));
    }

    ClusterState next = state;
    for (std::size_t c = 0; c < csmp.size(); ++c) {
        const auto s = static_cast<std::size_t>(csmp.target_of[c]);
        const auto& cap = req.containers()[c].capacity;
        next.committed_[s].push_back(cap);
        next.free_[s] -= cap;
        // Clamp tolerance-level negatives to zero.
        for (std::size_t k = 0; k < next.free_[s].dims(); ++k) {
            if (next.free_[s][k] < 0.0) next.free_[s][k] = 0.0;
        }
    }
    return next;
}

/// Request restricted to the containers that host at least one instance.
struct ReducedRequest {
    AppRequest request;
    IcmpAssignment icmp;
    std::vector<Index> original_container;  // reduced id -> id in the source request
};

inline ReducedRequest eliminate_empty_containers(const AppRequest& req, const IcmpAssignment& icmp) {
    std::vector<Index> remap(req.container_count(), kUnassigned);
    for (Index c : icmp.target_of) {
        if (c != kUnassigned) remap[static_cast<std::size_t>(c)] = 0;
    }
    ReducedRequest out;
    std::vector<Container> containers;
    for (std::size_t c = 0; c < remap.size(); ++c) {
        if (remap[c] == kUnassigned) continue;
        remap[c] = static_cast<Index>(containers.size());
        containers.push_back({remap[c], req.containers()[c].capacity});
        out.original_container.push_back(static_cast<Index>(c));
    }
    out.request = AppRequest(req.id(), req.components(), req.edges(), req.instances(), std::move(containers));
    out.icmp = IcmpAssignment(req.id(), req.instance_count());
    for (std::size_t i = 0; i < icmp.size(); ++i) {
        if (icmp.target_of[i] != kUnassigned) out.icmp.target_of[i] = remap[static_cast<std::size_t>(icmp.target_of[i])];
    }
    return out;
}

}  // namespace streamplace
