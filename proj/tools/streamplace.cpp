// streamplace: workload/cluster generation, single placements, experiments.
//
// Exit codes: 0 success, 1 configuration or input error, 2 placement
// failure (place only).

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "streamplace/cluster.hpp"
#include "streamplace/harness.hpp"
#include "streamplace/oracle.hpp"
#include "streamplace/serialization.hpp"
#include "streamplace/workload.hpp"

namespace sp = streamplace;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPlacement = 2;

struct Overrides {
    std::string config;
    std::optional<double> alpha;
    std::optional<std::size_t> samples;
    std::optional<double> omega;
    std::optional<std::string> stage1;
    std::optional<std::string> stage2;
    std::optional<std::string> topology;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> reps;
    std::optional<std::size_t> requests;
    std::string workload_file;
    std::string out;
    bool timing = false;
    bool fixed_workload = false;
};

void add_scheme_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--alpha", o.alpha, "stage-1 weight of cross-container traffic, in [0,1]");
    cmd->add_option("--samples", o.samples, "MCTS samples per decision step (both stages)");
    cmd->add_option("--omega", o.omega, "UCB1 exploration weight (both stages)");
    cmd->add_option("--stage1", o.stage1, "mips | ffd | r-heron | t-heron");
    cmd->add_option("--stage2", o.stage2, "mips | best-fit");
}

void add_experiment_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "experiment config (JSON)");
    add_scheme_flags(cmd, o);
    cmd->add_option("--topology", o.topology, "fat-tree | jellyfish");
    cmd->add_option("--seed", o.seed, "base seed");
    cmd->add_option("--reps", o.reps, "repetitions");
    cmd->add_option("--requests", o.requests, "requests per repetition");
    cmd->add_option("--workload", o.workload_file, "fixed workload file replacing generated streams");
    cmd->add_flag("--fixed-workload", o.fixed_workload, "reuse one workload and cluster; vary only search seeds");
    cmd->add_option("--out", o.out, "output directory")->required();
    cmd->add_flag("--timing", o.timing, "record wall-clock columns (output no longer reproducible)");
}

sp::SchemePair apply_scheme(sp::SchemePair p, const Overrides& o) {
    if (o.alpha) p.alpha = *o.alpha;
    if (o.samples) {
        p.mcts1.max_samples_per_step = *o.samples;
        p.mcts2.max_samples_per_step = *o.samples;
    }
    if (o.omega) {
        p.mcts1.exploration_weight = *o.omega;
        p.mcts2.exploration_weight = *o.omega;
    }
    if (o.stage1) p.stage1 = sp::stage1_scheme_from_string(*o.stage1);
    if (o.stage2) p.stage2 = sp::stage2_scheme_from_string(*o.stage2);
    p.validate();
    return p;
}

sp::ExperimentConfig load_experiment(const Overrides& o) {
    sp::ExperimentConfig cfg;
    if (!o.config.empty()) cfg = sp::experiment_config_from_json(sp::read_json_file(o.config));
    cfg.pair = apply_scheme(cfg.pair, o);
    if (o.topology) {
        try {
            cfg.cluster.topology = sp::topology_kind_from_string(*o.topology);
        } catch (const std::invalid_argument& e) {
            throw sp::ConfigError(e.what());
        }
    }
    if (o.seed) cfg.seed = *o.seed;
    if (o.reps) cfg.repetitions = *o.reps;
    if (o.requests) cfg.workload.n_requests = *o.requests;
    if (o.fixed_workload) cfg.redraw_workload = false;
    if (!o.workload_file.empty()) cfg.fixed_stream = sp::workload_from_json(sp::read_json_file(o.workload_file));
    cfg.validate();
    return cfg;
}

void write_results(const Overrides& o, const sp::ExperimentConfig& cfg, const std::string& parameter,
                   const std::vector<sp::SweepPoint>& points) {
    std::filesystem::create_directories(o.out);
    std::ostringstream csv;
    sp::write_csv(csv, points, !parameter.empty(), o.timing);
    sp::write_text_file((std::filesystem::path(o.out) / "results.csv").string(), csv.str());
    sp::write_json_file((std::filesystem::path(o.out) / "summary.json").string(),
                        sp::metrics_to_json(cfg, parameter, points, o.timing));
}

void emit(const std::string& out, const sp::json& j) {
    if (out.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        sp::write_json_file(out, j);
    }
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw sp::ConfigError("bad grid value '" + item + "'");
        grid.push_back(v);
    }
    if (grid.empty()) throw sp::ConfigError("empty grid");
    return grid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage instance placement engine and cluster simulator"};
    app.require_subcommand(1);
    Overrides o;

    auto* gen_workload = app.add_subcommand("gen-workload", "write a seeded request stream");
    gen_workload->add_option("--config", o.config, "experiment config (JSON); its workload section is used");
    gen_workload->add_option("--seed", o.seed, "workload seed");
    gen_workload->add_option("--requests", o.requests, "number of requests");
    gen_workload->add_option("--out", o.out, "output file (default: stdout)");

    auto* gen_cluster = app.add_subcommand("gen-cluster", "write servers, hop costs and topology");
    gen_cluster->add_option("--config", o.config, "experiment config (JSON); its cluster section is used");
    gen_cluster->add_option("--topology", o.topology, "fat-tree | jellyfish");
    gen_cluster->add_option("--seed", o.seed, "cluster seed");
    gen_cluster->add_option("--out", o.out, "output file (default: stdout)");

    std::string request_file, cluster_file;
    auto* place = app.add_subcommand("place", "place one request on a fresh cluster");
    place->add_option("request", request_file, "request file")->required();
    place->add_option("cluster", cluster_file, "cluster file")->required();
    add_scheme_flags(place, o);
    place->add_option("--seed", o.seed, "search seed");
    place->add_option("--out", o.out, "output file (default: stdout)");
    place->add_flag("--timing", o.timing, "include wall-clock fields");

    auto* experiment = app.add_subcommand("experiment", "repeat a request stream and average the metrics");
    add_experiment_flags(experiment, o);

    std::string parameter, grid_text;
    auto* sweep = app.add_subcommand("sweep", "run one experiment per grid value, paired across values");
    sweep->add_option("--param", parameter, "alpha | samples | omega")->required();
    sweep->add_option("--grid", grid_text, "comma-separated values")->required();
    add_experiment_flags(sweep, o);

    double cap = sp::kDefaultOracleCap;
    auto* oracle = app.add_subcommand("oracle", "exhaustive optimum for a small request");
    oracle->add_option("request", request_file, "request file")->required();
    oracle->add_option("cluster", cluster_file, "cluster file; adds the container-to-server optimum");
    oracle->add_option("--alpha", o.alpha, "stage-1 weight of cross-container traffic");
    oracle->add_option("--cap", cap, "largest search space to enumerate");
    oracle->add_option("--out", o.out, "output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (gen_workload->parsed()) {
            sp::WorkloadConfig cfg;
            if (!o.config.empty()) cfg = sp::experiment_config_from_json(sp::read_json_file(o.config)).workload;
            if (o.seed) cfg.seed = *o.seed;
            if (o.requests) cfg.n_requests = *o.requests;
            cfg.validate();
            emit(o.out, sp::workload_to_json(cfg, sp::generate_stream(cfg)));
            return kExitOk;
        }
        if (gen_cluster->parsed()) {
            sp::ClusterConfig cfg;
            if (!o.config.empty()) cfg = sp::experiment_config_from_json(sp::read_json_file(o.config)).cluster;
            if (o.topology) cfg.topology = sp::topology_kind_from_string(*o.topology);
            if (o.seed) cfg.seed = *o.seed;
            const auto cluster = sp::build_cluster(cfg);
            emit(o.out, sp::cluster_to_json(cluster.state, &cluster.graph));
            return kExitOk;
        }
        if (place->parsed()) {
            const auto req = sp::request_from_json(sp::read_json_file(request_file));
            const auto cluster = sp::cluster_from_json(sp::read_json_file(cluster_file));
            const auto pair = apply_scheme(sp::SchemePair{}, o);
            const auto outcome = sp::process_request(cluster, req, pair, o.seed.value_or(1));
            emit(o.out, sp::to_json(outcome.record, pair, o.timing));
            if (!outcome.record.accepted) {
                std::cerr << "placement failed: " << outcome.record.failure << '\n';
                return kExitPlacement;
            }
            return kExitOk;
        }
        if (experiment->parsed()) {
            const auto cfg = load_experiment(o);
            write_results(o, cfg, "", {{0.0, sp::run_experiment(cfg)}});
            return kExitOk;
        }
        if (sweep->parsed()) {
            const auto cfg = load_experiment(o);
            const auto p = sp::sweep_parameter_from_string(parameter);
            write_results(o, cfg, sp::to_string(p), sp::sweep(p, parse_grid(grid_text), cfg));
            return kExitOk;
        }
        if (oracle->parsed()) {
            const auto req = sp::request_from_json(sp::read_json_file(request_file));
            const sp::ObjectiveConfig objective(o.alpha.value_or(0.5));
            const auto icmp = sp::brute_force_icmp(req, objective, cap);
            sp::json j = sp::schema_header("oracle");
            j["request_id"] = req.id();
            j["alpha"] = objective.alpha;
            j["icmp"] = sp::oracle_to_json(icmp);
            if (!cluster_file.empty()) {
                const auto cluster = sp::cluster_from_json(sp::read_json_file(cluster_file));
                if (icmp.feasible) {
                    const auto reduced = sp::eliminate_empty_containers(req, icmp.assignment);
                    const auto csmp = sp::brute_force_csmp(cluster, reduced.request, reduced.icmp, cap);
                    sp::json c = sp::oracle_to_json(csmp);
                    if (csmp.feasible) {
                        sp::CsmpAssignment y = sp::CsmpAssignment::empty_for(req);
                        for (std::size_t k = 0; k < csmp.assignment.size(); ++k) {
                            y.target_of[static_cast<std::size_t>(reduced.original_container[k])] = csmp.assignment.target_of[k];
                        }
                        c["assignment"] = y.target_of;
                    }
                    j["csmp"] = c;
                } else {
                    j["csmp"] = sp::oracle_to_json(sp::OracleResult<sp::CsmpAssignment>{});
                }
            }
            emit(o.out, j);
            return kExitOk;
        }
    } catch (const sp::json::exception& e) {
        std::cerr << "error: malformed input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
