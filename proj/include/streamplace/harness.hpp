#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "streamplace/baselines.hpp"
#include "streamplace/cluster.hpp"
#include "streamplace/mcts.hpp"
#include "streamplace/model.hpp"
#include "streamplace/objectives.hpp"
#include "streamplace/ranges.hpp"
#include "streamplace/stages.hpp"
#include "streamplace/workload.hpp"

namespace streamplace {

enum class Stage1Scheme { mips, ffd, r_heron, t_heron };
enum class Stage2Scheme { mips, best_fit };

inline const char* to_string(Stage1Scheme s) {
    switch (s) {
        case Stage1Scheme::mips: return "mips";
        case Stage1Scheme::ffd: return "ffd";
        case Stage1Scheme::r_heron: return "r-heron";
        case Stage1Scheme::t_heron: return "t-heron";
    }
    return "?";
}

inline const char* to_string(Stage2Scheme s) { return s == Stage2Scheme::mips ? "mips" : "best-fit"; }

inline Stage1Scheme stage1_scheme_from_string(const std::string& name) {
    if (name == "mips") return Stage1Scheme::mips;
    if (name == "ffd") return Stage1Scheme::ffd;
    if (name == "r-heron") return Stage1Scheme::r_heron;
    if (name == "t-heron") return Stage1Scheme::t_heron;
    throw ConfigError("unknown stage-1 scheme '" + name + "' (expected mips, ffd, r-heron or t-heron)");
}

inline Stage2Scheme stage2_scheme_from_string(const std::string& name) {
    if (name == "mips") return Stage2Scheme::mips;
    if (name == "best-fit") return Stage2Scheme::best_fit;
    throw ConfigError("unknown stage-2 scheme '" + name + "' (expected mips or best-fit)");
}

/// Scheme per stage plus the MIPS settings each stage uses when it runs MCTS.
struct SchemePair {
    Stage1Scheme stage1 = Stage1Scheme::mips;
    Stage2Scheme stage2 = Stage2Scheme::mips;
    double alpha = 0.5;
    MctsConfig mcts1;
    MctsConfig mcts2;

    std::string label() const { return std::string(to_string(stage1)) + "/" + to_string(stage2); }

    void validate() const {
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
        try {
            mcts1.validate();
            mcts2.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
};

/// Outcome of one request. Stage-1 costs are defined once stage 1 completes;
/// W only for accepted requests.
struct RequestRecord {
    Index request_id = 0;
    bool stage1_done = false;
    bool accepted = false;
    std::string failure;

    double T = 0.0;
    std::size_t U = 0;
    double icmp_obj = 0.0;
    double W = 0.0;

    double ms_stage1 = 0.0;
    double ms_stage2 = 0.0;
    std::size_t samples_stage1 = 0;
    std::size_t samples_stage2 = 0;

    IcmpAssignment icmp;  // X over the request's original containers
    CsmpAssignment csmp;  // Y over the original containers; eliminated ones stay unassigned
};

struct ProcessOutcome {
    ClusterState state;
    RequestRecord record;
};

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

inline IcmpAssignment run_stage1(const AppRequest& req, const SchemePair& pair, std::uint64_t seed,
                                 std::size_t& samples) {
    switch (pair.stage1) {
        case Stage1Scheme::mips: {
            auto r = run_mcts_icmp(req, ObjectiveConfig(pair.alpha), pair.mcts1, seed);
            samples = r.stats.accepted_samples;
            return r.assignment;
        }
        case Stage1Scheme::ffd: return ffd_icmp(req);
        case Stage1Scheme::r_heron: return r_heron_icmp(req);
        case Stage1Scheme::t_heron: return t_heron_icmp(req);
    }
    throw ConfigError("unknown stage-1 scheme");
}

}  // namespace detail

/// Two-stage placement of one request: instances to containers, empty
/// containers dropped, remaining containers to servers, then commit. Any
/// failure rejects the request and leaves the state untouched.
inline ProcessOutcome process_request(const ClusterState& state, const AppRequest& req, const SchemePair& pair,
                                      std::uint64_t seed) {
    RequestRecord rec;
    rec.request_id = req.id();
    rec.icmp = IcmpAssignment::empty_for(req);
    rec.csmp = CsmpAssignment::empty_for(req);

    if (auto v = check_intake(req); !v) {
        rec.failure = std::string("intake: ") + v.detail;
        return {state, std::move(rec)};
    }

    const auto t1 = std::chrono::steady_clock::now();
    try {
        rec.icmp = detail::run_stage1(req, pair, derive_seed(seed, 1), rec.samples_stage1);
    } catch (const PlacementFailure& e) {
        rec.ms_stage1 = detail::elapsed_ms(t1);
        rec.failure = std::string("stage 1: ") + e.what();
        return {state, std::move(rec)};
    }
    rec.ms_stage1 = detail::elapsed_ms(t1);
    rec.stage1_done = true;
    rec.T = cross_container_traffic(req, rec.icmp);
    rec.U = container_utilization(req, rec.icmp);
    rec.icmp_obj = icmp_objective(req, rec.icmp, ObjectiveConfig(pair.alpha));

    const ReducedRequest reduced = eliminate_empty_containers(req, rec.icmp);
    const auto t2 = std::chrono::steady_clock::now();
    CsmpAssignment y;
    try {
        if (pair.stage2 == Stage2Scheme::mips) {
            auto r = run_mcts_csmp(state, reduced.request, reduced.icmp, pair.mcts2, derive_seed(seed, 2));
            rec.samples_stage2 = r.stats.accepted_samples;
            y = std::move(r.assignment);
        } else {
            y = best_fit_csmp(state, reduced.request);
        }
    } catch (const PlacementFailure& e) {
        rec.ms_stage2 = detail::elapsed_ms(t2);
        rec.failure = std::string("stage 2: ") + e.what();
        return {state, std::move(rec)};
    }
    rec.ms_stage2 = detail::elapsed_ms(t2);

    rec.W = csmp_objective(state, reduced.request, reduced.icmp, y);
    for (std::size_t c = 0; c < y.size(); ++c) rec.csmp.target_of[static_cast<std::size_t>(reduced.original_container[c])] = y.target_of[c];
    ClusterState next = commit(state, reduced.request, reduced.icmp, y);
    rec.accepted = true;
    return {std::move(next), std::move(rec)};
}

/// One pass over a request stream on a fresh cluster.
struct RepetitionMetrics {
    std::size_t rep = 0;
    std::size_t requests = 0;
    std::size_t rejections = 0;
    std::size_t stage1_completed = 0;
    // Means per request: T, U and icmp_obj over requests whose stage 1
    // completed, W over accepted requests. NaN when nothing qualifies.
    double T = std::numeric_limits<double>::quiet_NaN();
    double U = std::numeric_limits<double>::quiet_NaN();
    double icmp_obj = std::numeric_limits<double>::quiet_NaN();
    double W = std::numeric_limits<double>::quiet_NaN();
    double ms_stage1 = 0.0;  // summed over the stream
    double ms_stage2 = 0.0;
    std::vector<RequestRecord> records;
    ClusterState final_state;
};

inline RepetitionMetrics aggregate(std::size_t rep, std::vector<RequestRecord> records) {
    RepetitionMetrics m;
    m.rep = rep;
    m.requests = records.size();
    double t = 0, u = 0, obj = 0, w = 0;
    std::size_t accepted = 0;
    for (const auto& r : records) {
        m.ms_stage1 += r.ms_stage1;
        m.ms_stage2 += r.ms_stage2;
        if (!r.accepted) ++m.rejections;
        if (r.stage1_done) {
            ++m.stage1_completed;
            t += r.T;
            u += static_cast<double>(r.U);
            obj += r.icmp_obj;
        }
        if (r.accepted) {
            ++accepted;
            w += r.W;
        }
    }
    if (m.stage1_completed > 0) {
        const auto n = static_cast<double>(m.stage1_completed);
        m.T = t / n;
        m.U = u / n;
        m.icmp_obj = obj / n;
    }
    if (accepted > 0) m.W = w / static_cast<double>(accepted);
    m.records = std::move(records);
    return m;
}

/// Runs `stream` in arrival order starting from `cluster`.
inline RepetitionMetrics run_stream(const ClusterState& cluster, const std::vector<AppRequest>& stream,
                                    const SchemePair& pair, std::uint64_t seed, std::size_t rep = 0) {
    ClusterState state = cluster;
    std::vector<RequestRecord> records;
    records.reserve(stream.size());
    for (std::size_t r = 0; r < stream.size(); ++r) {
        auto out = process_request(state, stream[r], pair, derive_seed(seed, 0x72657175ULL, r));
        state = std::move(out.state);
        records.push_back(std::move(out.record));
    }
    auto m = aggregate(rep, std::move(records));
    m.final_state = std::move(state);
    return m;
}

struct MeanVariance {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double variance = std::numeric_limits<double>::quiet_NaN();  // sample variance (n - 1)
    std::size_t n = 0;

    double std_error() const { return n > 0 ? std::sqrt(variance / static_cast<double>(n)) : variance; }
};

/// Mean and sample variance over the finite values.
inline MeanVariance mean_variance(const std::vector<double>& xs) {
    MeanVariance out;
    double sum = 0.0;
    for (double x : xs) {
        if (std::isfinite(x)) {
            sum += x;
            ++out.n;
        }
    }
    if (out.n == 0) return out;
    out.mean = sum / static_cast<double>(out.n);
    if (out.n < 2) {
        out.variance = 0.0;
        return out;
    }
    double ss = 0.0;
    for (double x : xs) {
        if (std::isfinite(x)) ss += (x - out.mean) * (x - out.mean);
    }
    out.variance = ss / static_cast<double>(out.n - 1);
    return out;
}

struct ExperimentConfig {
    ClusterConfig cluster;
    WorkloadConfig workload;
    SchemePair pair;
    std::size_t repetitions = 1;
    std::uint64_t seed = 1;
    // When set, every repetition draws its own workload and server
    // capacities; otherwise both come from the configs' own seeds and only
    // the search seed changes between repetitions.
    bool redraw_workload = true;
    // Replaces the generated stream in every repetition when set.
    std::optional<std::vector<AppRequest>> fixed_stream;

    void validate() const {
        cluster.validate();
        workload.validate();
        pair.validate();
        if (repetitions == 0) throw ConfigError("repetitions must be positive");
    }
};

struct ExperimentSummary {
    MeanVariance requests, rejections, T, U, icmp_obj, W, ms_stage1, ms_stage2;
};

struct ExperimentResult {
    std::vector<RepetitionMetrics> reps;
    ExperimentSummary summary;
};

inline ExperimentSummary summarize(const std::vector<RepetitionMetrics>& reps) {
    auto column = [&](auto get) {
        std::vector<double> xs;
        xs.reserve(reps.size());
        for (const auto& r : reps) xs.push_back(static_cast<double>(get(r)));
        return mean_variance(xs);
    };
    ExperimentSummary s;
    s.requests = column([](const RepetitionMetrics& r) { return r.requests; });
    s.rejections = column([](const RepetitionMetrics& r) { return r.rejections; });
    s.T = column([](const RepetitionMetrics& r) { return r.T; });
    s.U = column([](const RepetitionMetrics& r) { return r.U; });
    s.icmp_obj = column([](const RepetitionMetrics& r) { return r.icmp_obj; });
    s.W = column([](const RepetitionMetrics& r) { return r.W; });
    s.ms_stage1 = column([](const RepetitionMetrics& r) { return r.ms_stage1; });
    s.ms_stage2 = column([](const RepetitionMetrics& r) { return r.ms_stage2; });
    return s;
}

/// Workload and cluster configs of repetition `rep`.
inline std::pair<WorkloadConfig, ClusterConfig> repetition_configs(const ExperimentConfig& cfg, std::size_t rep) {
    WorkloadConfig w = cfg.workload;
    ClusterConfig c = cfg.cluster;
    if (cfg.redraw_workload) {
        w.seed = derive_seed(cfg.seed, 0x776f726bULL, rep);
        c.seed = derive_seed(cfg.seed, 0x636c7573ULL, rep);
    }
    return {w, c};
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult out;
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
        const auto [w, c] = repetition_configs(cfg, rep);
        const Cluster cluster = build_cluster(c);
        const auto stream = cfg.fixed_stream ? *cfg.fixed_stream : generate_stream(w);
        auto m = run_stream(cluster.state, stream, cfg.pair, derive_seed(cfg.seed, 0x6d697073ULL, rep), rep);
        // Per-request records are kept; the final state is only needed by callers of run_stream.
        m.final_state = ClusterState();
        out.reps.push_back(std::move(m));
    }
    out.summary = summarize(out.reps);
    return out;
}

enum class SweepParameter { alpha, samples, omega };

inline const char* to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::alpha: return "alpha";
        case SweepParameter::samples: return "samples";
        case SweepParameter::omega: return "omega";
    }
    return "?";
}

inline SweepParameter sweep_parameter_from_string(const std::string& name) {
    if (name == "alpha") return SweepParameter::alpha;
    if (name == "samples") return SweepParameter::samples;
    if (name == "omega") return SweepParameter::omega;
    throw ConfigError("unknown sweep parameter '" + name + "' (expected alpha, samples or omega)");
}

/// `base` with one parameter replaced; samples and omega apply to both stages.
inline ExperimentConfig with_parameter(ExperimentConfig base, SweepParameter p, double value) {
    switch (p) {
        case SweepParameter::alpha:
            base.pair.alpha = value;
            break;
        case SweepParameter::samples:
            if (!(value >= 0.0) || value != std::floor(value)) throw ConfigError("sample counts must be nonnegative integers");
            base.pair.mcts1.max_samples_per_step = static_cast<std::size_t>(value);
            base.pair.mcts2.max_samples_per_step = static_cast<std::size_t>(value);
            break;
        case SweepParameter::omega:
            base.pair.mcts1.exploration_weight = value;
            base.pair.mcts2.exploration_weight = value;
            break;
    }
    return base;
}

struct SweepPoint {
    double value = 0.0;
    ExperimentResult result;
};

/// One experiment per grid value. All points share the base seed, so they
/// see identical workloads, clusters and search seeds (paired comparison).
inline std::vector<SweepPoint> sweep(SweepParameter p, const std::vector<double>& grid, const ExperimentConfig& base) {
    if (grid.empty()) throw ConfigError("sweep grid is empty");
    std::vector<ExperimentConfig> configs;
    for (double v : grid) {
        configs.push_back(with_parameter(base, p, v));
        configs.back().validate();
    }
    std::vector<SweepPoint> out;
    for (std::size_t g = 0; g < grid.size(); ++g) out.push_back({grid[g], run_experiment(configs[g])});
    return out;
}

}  // namespace streamplace
