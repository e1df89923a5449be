#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "streamplace/cluster.hpp"
#include "streamplace/harness.hpp"
#include "streamplace/model.hpp"
#include "streamplace/oracle.hpp"
#include "streamplace/topology.hpp"
#include "streamplace/workload.hpp"

namespace streamplace {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

inline json schema_header(const std::string& kind) {
    return json{{"schema", "streamplace." + kind}, {"schema_version", kSchemaVersion}};
}

namespace detail {

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
        if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

inline void check_header(const json& j, const std::string& kind) {
    if (!j.is_object()) throw ConfigError(kind + " file: expected a JSON object");
    if (j.value("schema", std::string()) != "streamplace." + kind) {
        throw ConfigError(kind + " file: schema must be \"streamplace." + kind + "\"");
    }
    if (!j.contains("schema_version") || j.at("schema_version") != kSchemaVersion) {
        throw ConfigError(kind + " file: unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
    }
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

inline json range_to_json(const IntRange& r) { return json::array({r.lo, r.hi}); }
inline json range_to_json(const RealRange& r) { return json::array({r.lo, r.hi}); }

template <typename R>
R range_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(what) + ": expected [lo, hi]");
    R r;
    j.at(0).get_to(r.lo);
    j.at(1).get_to(r.hi);
    return r;
}

inline json vector_to_json(const ResourceVector& v) { return json(v.values()); }

inline ResourceVector vector_from_json(const json& j) { return ResourceVector(j.get<std::vector<double>>()); }

}  // namespace detail

// ---- configs ---------------------------------------------------------------

inline json to_json(const WorkloadConfig& c) {
    json demand = json::array();
    for (const auto& d : c.demand) demand.push_back(detail::range_to_json(d));
    return json{{"n_requests", c.n_requests},
                {"depth", detail::range_to_json(c.depth)},
                {"components", detail::range_to_json(c.components)},
                {"parallelism", detail::range_to_json(c.parallelism)},
                {"demand", demand},
                {"edge_rate", detail::range_to_json(c.edge_rate)},
                {"extra_edge_probability", c.extra_edge_probability},
                {"container_headroom", c.container_headroom},
                {"container_slack", c.container_slack},
                {"seed", c.seed}};
}

/// Keys present in `j` override `base`.
inline WorkloadConfig workload_config_from_json(const json& j, WorkloadConfig base = {}) {
    detail::reject_unknown_keys(j,
                                {"n_requests", "depth", "components", "parallelism", "demand", "edge_rate",
                                 "extra_edge_probability", "container_headroom", "container_slack", "seed"},
                                "workload config");
    detail::read_if(j, "n_requests", base.n_requests);
    if (j.contains("depth")) base.depth = detail::range_from_json<IntRange>(j.at("depth"), "depth");
    if (j.contains("components")) base.components = detail::range_from_json<IntRange>(j.at("components"), "components");
    if (j.contains("parallelism")) base.parallelism = detail::range_from_json<IntRange>(j.at("parallelism"), "parallelism");
    if (j.contains("demand")) {
        base.demand.clear();
        for (const auto& d : j.at("demand")) base.demand.push_back(detail::range_from_json<IntRange>(d, "demand"));
    }
    if (j.contains("edge_rate")) base.edge_rate = detail::range_from_json<RealRange>(j.at("edge_rate"), "edge_rate");
    detail::read_if(j, "extra_edge_probability", base.extra_edge_probability);
    detail::read_if(j, "container_headroom", base.container_headroom);
    detail::read_if(j, "container_slack", base.container_slack);
    detail::read_if(j, "seed", base.seed);
    return base;
}

inline json to_json(const ClusterConfig& c) {
    json capacity = json::array();
    for (const auto& r : c.capacity) capacity.push_back(detail::range_to_json(r));
    return json{{"topology", to_string(c.topology)},
                {"fat_tree_k", c.fat_tree_k},
                {"jellyfish_switches", c.jellyfish_switches},
                {"jellyfish_ports", c.jellyfish_ports},
                {"jellyfish_servers", c.jellyfish_servers},
                {"capacity", capacity},
                {"seed", c.seed}};
}

inline ClusterConfig cluster_config_from_json(const json& j, ClusterConfig base = {}) {
    detail::reject_unknown_keys(j,
                                {"topology", "fat_tree_k", "jellyfish_switches", "jellyfish_ports",
                                 "jellyfish_servers", "capacity", "seed"},
                                "cluster config");
    if (j.contains("topology")) {
        try {
            base.topology = topology_kind_from_string(j.at("topology").get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    detail::read_if(j, "fat_tree_k", base.fat_tree_k);
    detail::read_if(j, "jellyfish_switches", base.jellyfish_switches);
    detail::read_if(j, "jellyfish_ports", base.jellyfish_ports);
    detail::read_if(j, "jellyfish_servers", base.jellyfish_servers);
    if (j.contains("capacity")) {
        base.capacity.clear();
        for (const auto& r : j.at("capacity")) base.capacity.push_back(detail::range_from_json<IntRange>(r, "capacity"));
    }
    detail::read_if(j, "seed", base.seed);
    return base;
}

inline json to_json(const MctsConfig& c) {
    return json{{"samples", c.max_samples_per_step},
                {"omega", c.exploration_weight},
                {"rollout", c.rollout == RolloutPolicy::greedy ? "greedy" : "uniform"},
                {"expansion", c.expansion == ExpansionPolicy::scored ? "scored" : "uniform"},
                {"prior_bias", c.prior_bias},
                {"prior_q", c.prior_q ? json(*c.prior_q) : json(nullptr)},
                {"max_attempts_factor", c.max_attempts_factor}};
}

inline MctsConfig mcts_config_from_json(const json& j, MctsConfig base = {}) {
    detail::reject_unknown_keys(
        j, {"samples", "omega", "rollout", "expansion", "prior_bias", "prior_q", "max_attempts_factor"}, "mcts config");
    detail::read_if(j, "samples", base.max_samples_per_step);
    detail::read_if(j, "omega", base.exploration_weight);
    if (j.contains("rollout")) {
        const auto s = j.at("rollout").get<std::string>();
        if (s != "greedy" && s != "uniform") throw ConfigError("rollout must be greedy or uniform");
        base.rollout = s == "greedy" ? RolloutPolicy::greedy : RolloutPolicy::uniform;
    }
    if (j.contains("expansion")) {
        const auto s = j.at("expansion").get<std::string>();
        if (s != "scored" && s != "uniform") throw ConfigError("expansion must be scored or uniform");
        base.expansion = s == "scored" ? ExpansionPolicy::scored : ExpansionPolicy::uniform;
    }
    detail::read_if(j, "prior_bias", base.prior_bias);
    if (j.contains("prior_q")) {
        if (j.at("prior_q").is_null()) {
            base.prior_q.reset();
        } else {
            base.prior_q = j.at("prior_q").get<double>();
        }
    }
    detail::read_if(j, "max_attempts_factor", base.max_attempts_factor);
    return base;
}

inline json to_json(const SchemePair& p) {
    return json{{"stage1", to_string(p.stage1)},
                {"stage2", to_string(p.stage2)},
                {"alpha", p.alpha},
                {"mcts1", to_json(p.mcts1)},
                {"mcts2", to_json(p.mcts2)}};
}

inline SchemePair scheme_pair_from_json(const json& j, SchemePair base = {}) {
    detail::reject_unknown_keys(j, {"stage1", "stage2", "alpha", "mcts1", "mcts2"}, "scheme");
    if (j.contains("stage1")) base.stage1 = stage1_scheme_from_string(j.at("stage1").get<std::string>());
    if (j.contains("stage2")) base.stage2 = stage2_scheme_from_string(j.at("stage2").get<std::string>());
    detail::read_if(j, "alpha", base.alpha);
    if (j.contains("mcts1")) base.mcts1 = mcts_config_from_json(j.at("mcts1"), base.mcts1);
    if (j.contains("mcts2")) base.mcts2 = mcts_config_from_json(j.at("mcts2"), base.mcts2);
    return base;
}

inline json to_json(const ExperimentConfig& c) {
    json j = schema_header("config");
    j["cluster"] = to_json(c.cluster);
    j["workload"] = to_json(c.workload);
    j["scheme"] = to_json(c.pair);
    j["repetitions"] = c.repetitions;
    j["seed"] = c.seed;
    j["redraw_workload"] = c.redraw_workload;
    return j;
}

inline ExperimentConfig experiment_config_from_json(const json& j, ExperimentConfig base = {}) {
    detail::check_header(j, "config");
    detail::reject_unknown_keys(
        j, {"schema", "schema_version", "cluster", "workload", "scheme", "repetitions", "seed", "redraw_workload"},
        "config");
    if (j.contains("cluster")) base.cluster = cluster_config_from_json(j.at("cluster"), base.cluster);
    if (j.contains("workload")) base.workload = workload_config_from_json(j.at("workload"), base.workload);
    if (j.contains("scheme")) base.pair = scheme_pair_from_json(j.at("scheme"), base.pair);
    detail::read_if(j, "repetitions", base.repetitions);
    detail::read_if(j, "seed", base.seed);
    detail::read_if(j, "redraw_workload", base.redraw_workload);
    return base;
}

// ---- requests and workloads ------------------------------------------------

inline json request_body_to_json(const AppRequest& req) {
    json components = json::array();
    for (const auto& v : req.components()) components.push_back({{"id", v.id}, {"parallelism", v.parallelism}});
    json edges = json::array();
    for (const auto& e : req.edges()) edges.push_back({{"src", e.src}, {"dst", e.dst}, {"rate", e.rate}});
    json instances = json::array();
    for (const auto& i : req.instances()) {
        instances.push_back({{"id", i.id}, {"component", i.component}, {"demand", detail::vector_to_json(i.demand)}});
    }
    json containers = json::array();
    for (const auto& c : req.containers()) {
        containers.push_back({{"id", c.id}, {"capacity", detail::vector_to_json(c.capacity)}});
    }
    return json{{"id", req.id()},
                {"components", components},
                {"edges", edges},
                {"instances", instances},
                {"containers", containers}};
}

inline json to_json(const AppRequest& req) {
    json j = schema_header("request");
    j.update(request_body_to_json(req));
    return j;
}

inline AppRequest request_body_from_json(const json& j) {
    detail::reject_unknown_keys(j, {"schema", "schema_version", "id", "components", "edges", "instances", "containers"},
                                "request");
    std::vector<Component> components;
    for (const auto& v : j.at("components")) {
        detail::reject_unknown_keys(v, {"id", "parallelism"}, "component");
        components.push_back({v.at("id").get<Index>(), v.at("parallelism").get<int>()});
    }
    std::vector<StreamEdge> edges;
    for (const auto& e : j.at("edges")) {
        detail::reject_unknown_keys(e, {"src", "dst", "rate"}, "edge");
        edges.push_back({e.at("src").get<Index>(), e.at("dst").get<Index>(), e.at("rate").get<double>()});
    }
    std::vector<Instance> instances;
    for (const auto& i : j.at("instances")) {
        detail::reject_unknown_keys(i, {"id", "component", "demand"}, "instance");
        instances.push_back({i.at("id").get<Index>(), i.at("component").get<Index>(), detail::vector_from_json(i.at("demand"))});
    }
    std::vector<Container> containers;
    for (const auto& c : j.at("containers")) {
        detail::reject_unknown_keys(c, {"id", "capacity"}, "container");
        containers.push_back({c.at("id").get<Index>(), detail::vector_from_json(c.at("capacity"))});
    }
    return AppRequest(j.at("id").get<Index>(), std::move(components), std::move(edges), std::move(instances),
                      std::move(containers));
}

inline AppRequest request_from_json(const json& j) {
    detail::check_header(j, "request");
    return request_body_from_json(j);
}

inline json workload_to_json(const WorkloadConfig& cfg, const std::vector<AppRequest>& stream) {
    json j = schema_header("workload");
    j["config"] = to_json(cfg);
    json requests = json::array();
    for (const auto& r : stream) requests.push_back(request_body_to_json(r));
    j["requests"] = requests;
    return j;
}

inline std::vector<AppRequest> workload_from_json(const json& j) {
    detail::check_header(j, "workload");
    detail::reject_unknown_keys(j, {"schema", "schema_version", "config", "requests"}, "workload");
    std::vector<AppRequest> out;
    for (const auto& r : j.at("requests")) out.push_back(request_body_from_json(r));
    return out;
}

// ---- clusters --------------------------------------------------------------

/// Adjacency-list export of a network graph.
inline json to_json(const NetworkGraph& g) {
    json adjacency = json::array();
    for (const auto& n : g.adjacency) adjacency.push_back(n);
    return json{{"kind", to_string(g.kind)},
                {"switch_count", g.switch_count},
                {"server_count", g.server_count},
                {"port_count", g.port_count},
                {"link_bandwidth_gbps", g.link_bandwidth_gbps},
                {"adjacency", adjacency}};
}

inline json cluster_to_json(const ClusterState& state, const NetworkGraph* graph = nullptr) {
    json j = schema_header("cluster");
    if (graph) j["topology"] = to_json(*graph);
    json servers = json::array();
    for (const auto& s : state.servers()) servers.push_back({{"id", s.id}, {"capacity", detail::vector_to_json(s.capacity)}});
    j["servers"] = servers;
    json theta = json::array();
    const std::size_t n = state.server_count();
    for (std::size_t s = 0; s < n; ++s) {
        json row = json::array();
        for (std::size_t t = 0; t < n; ++t) row.push_back(state.hop_cost(static_cast<Index>(s), static_cast<Index>(t)));
        theta.push_back(row);
    }
    j["hop_cost"] = theta;
    return j;
}

/// Fresh cluster (nothing committed) from servers and hop costs; any
/// topology block is informational.
inline ClusterState cluster_from_json(const json& j) {
    detail::check_header(j, "cluster");
    detail::reject_unknown_keys(j, {"schema", "schema_version", "topology", "servers", "hop_cost"}, "cluster");
    std::vector<Server> servers;
    for (const auto& s : j.at("servers")) {
        detail::reject_unknown_keys(s, {"id", "capacity"}, "server");
        servers.push_back({s.at("id").get<Index>(), detail::vector_from_json(s.at("capacity"))});
    }
    std::vector<double> theta;
    const auto& rows = j.at("hop_cost");
    if (rows.size() != servers.size()) throw ConfigError("cluster: hop_cost must have one row per server");
    for (const auto& row : rows) {
        if (row.size() != servers.size()) throw ConfigError("cluster: hop_cost must be square");
        for (const auto& x : row) theta.push_back(x.get<double>());
    }
    try {
        return ClusterState(std::move(servers), std::move(theta));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("cluster: ") + e.what());
    }
}

// ---- results ---------------------------------------------------------------

inline json to_json(const RequestRecord& r, const SchemePair& pair, bool timing) {
    json j = schema_header("placement");
    j["request_id"] = r.request_id;
    j["stage1"] = to_string(pair.stage1);
    j["stage2"] = to_string(pair.stage2);
    j["alpha"] = pair.alpha;
    j["accepted"] = r.accepted;
    j["failure"] = r.failure;
    j["X"] = r.icmp.target_of;
    j["Y"] = r.csmp.target_of;
    j["T"] = r.stage1_done ? json(r.T) : json(nullptr);
    j["U"] = r.stage1_done ? json(r.U) : json(nullptr);
    j["icmp_objective"] = r.stage1_done ? json(r.icmp_obj) : json(nullptr);
    j["W"] = r.accepted ? json(r.W) : json(nullptr);
    j["samples_stage1"] = r.samples_stage1;
    j["samples_stage2"] = r.samples_stage2;
    if (timing) {
        j["ms_stage1"] = r.ms_stage1;
        j["ms_stage2"] = r.ms_stage2;
    }
    return j;
}

namespace detail {

inline json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json to_json(const MeanVariance& m) {
    return json{{"mean", finite_or_null(m.mean)}, {"variance", finite_or_null(m.variance)}, {"n", m.n}};
}

inline json summary_to_json(const ExperimentSummary& s, bool timing) {
    json j{{"requests", to_json(s.requests)}, {"rejections", to_json(s.rejections)}, {"T", to_json(s.T)},
           {"U", to_json(s.U)},           {"icmp_obj", to_json(s.icmp_obj)},     {"W", to_json(s.W)}};
    if (timing) {
        j["ms_stage1"] = to_json(s.ms_stage1);
        j["ms_stage2"] = to_json(s.ms_stage2);
    }
    return j;
}

}  // namespace detail

/// JSON summary for an experiment (`parameter` empty) or a sweep.
inline json metrics_to_json(const ExperimentConfig& cfg, const std::string& parameter,
                            const std::vector<SweepPoint>& points, bool timing) {
    json j = schema_header("metrics");
    j["parameter"] = parameter.empty() ? json(nullptr) : json(parameter);
    j["config"] = to_json(cfg);
    json arr = json::array();
    for (const auto& p : points) {
        arr.push_back({{"grid_value", parameter.empty() ? json(nullptr) : json(p.value)},
                       {"repetitions", p.result.reps.size()},
                       {"summary", detail::summary_to_json(p.result.summary, timing)}});
    }
    j["points"] = arr;
    return j;
}

template <typename A>
json oracle_to_json(const OracleResult<A>& r) {
    return json{{"feasible", r.feasible},
                {"value", r.feasible ? json(r.value) : json(nullptr)},
                {"assignment", r.feasible ? json(r.assignment.target_of) : json(nullptr)}};
}

// ---- CSV -------------------------------------------------------------------

inline constexpr const char* kCsvHeader = "grid_value,rep,requests,rejections,T,U,icmp_obj,W,ms_stage1,ms_stage2";

/// Shortest round-trip decimal form; empty for NaN.
inline std::string format_number(double x) {
    if (std::isnan(x)) return "";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc()) throw std::runtime_error("number formatting failed");
    return std::string(buf, end);
}

/// One row per repetition per grid point. `grid_value` is blank for plain
/// experiments; timing columns are zero unless `timing` is set, so repeated
/// runs produce identical files.
inline void write_csv(std::ostream& os, const std::vector<SweepPoint>& points, bool has_grid, bool timing) {
    os << kCsvHeader << '\n';
    for (const auto& p : points) {
        for (const auto& r : p.result.reps) {
            os << (has_grid ? format_number(p.value) : std::string()) << ',' << r.rep << ',' << r.requests << ','
               << r.rejections << ',' << format_number(r.T) << ',' << format_number(r.U) << ','
               << format_number(r.icmp_obj) << ',' << format_number(r.W) << ','
               << format_number(timing ? r.ms_stage1 : 0.0) << ',' << format_number(timing ? r.ms_stage2 : 0.0) << '\n';
        }
    }
}

// ---- files -----------------------------------------------------------------

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace streamplace
