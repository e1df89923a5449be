#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "streamplace/serialization.hpp"

using namespace streamplace;

TEST(Serialization, RequestRoundTrip) {
    const auto req = fixtures::diamond();
    const auto j = to_json(req);
    EXPECT_EQ(j.at("schema"), "streamplace.request");
    EXPECT_EQ(j.at("schema_version"), kSchemaVersion);
    const auto back = request_from_json(j);
    EXPECT_EQ(to_json(back).dump(), j.dump());
    EXPECT_EQ(back.total_rate(), req.total_rate());
}

TEST(Serialization, WorkloadRoundTrip) {
    WorkloadConfig cfg;
    cfg.n_requests = 4;
    cfg.seed = 11;
    const auto stream = generate_stream(cfg);
    const auto j = workload_to_json(cfg, stream);
    const auto back = workload_from_json(json::parse(j.dump()));
    ASSERT_EQ(back.size(), stream.size());
    for (std::size_t r = 0; r < stream.size(); ++r) {
        EXPECT_EQ(request_body_to_json(back[r]).dump(), request_body_to_json(stream[r]).dump());
    }
    const auto wc = workload_config_from_json(j.at("config"));
    EXPECT_EQ(wc.seed, 11u);
    EXPECT_EQ(wc.depth, cfg.depth);
    EXPECT_EQ(wc.demand, cfg.demand);
}

TEST(Serialization, ClusterRoundTrip) {
    ClusterConfig cfg;
    cfg.topology = TopologyKind::jellyfish;
    const auto c = build_cluster(cfg);
    const auto j = cluster_to_json(c.state, &c.graph);
    const auto back = cluster_from_json(json::parse(j.dump()));
    EXPECT_EQ(back.server_count(), c.state.server_count());
    EXPECT_EQ(back.hop_cost_matrix(), c.state.hop_cost_matrix());
    for (Index s = 0; s < 16; ++s) EXPECT_EQ(back.free(s), c.state.server(s).capacity);
}

TEST(Serialization, ExperimentConfigRoundTripAndOverrides) {
    ExperimentConfig cfg;
    cfg.pair.stage1 = Stage1Scheme::r_heron;
    cfg.pair.mcts2.exploration_weight = 5;
    cfg.pair.mcts1.prior_q = 3.5;
    cfg.repetitions = 7;
    cfg.cluster.topology = TopologyKind::jellyfish;
    const auto j = to_json(cfg);
    const auto back = experiment_config_from_json(json::parse(j.dump()));
    EXPECT_EQ(to_json(back).dump(), j.dump());

    json partial = schema_header("config");
    partial["scheme"] = {{"alpha", 0.75}};
    const auto p = experiment_config_from_json(partial, cfg);
    EXPECT_EQ(p.pair.alpha, 0.75);
    EXPECT_EQ(p.pair.stage1, Stage1Scheme::r_heron);
    EXPECT_EQ(p.repetitions, 7u);
}

TEST(Serialization, RejectsUnknownKeysAndBadHeaders) {
    json j = to_json(fixtures::chain3());
    j["colour"] = "red";
    EXPECT_THROW(request_from_json(j), ConfigError);

    j = to_json(fixtures::chain3());
    j["schema_version"] = kSchemaVersion + 1;
    EXPECT_THROW(request_from_json(j), ConfigError);
    j.erase("schema_version");
    EXPECT_THROW(request_from_json(j), ConfigError);

    json cfg = schema_header("config");
    cfg["scheme"] = {{"stage1", "mips"}, {"beta", 1}};
    EXPECT_THROW(experiment_config_from_json(cfg), ConfigError);
    cfg = schema_header("config");
    cfg["scheme"] = {{"mcts1", {{"samples", 10}, {"depth", 3}}}};
    EXPECT_THROW(experiment_config_from_json(cfg), ConfigError);

    // a request file is not a cluster file
    EXPECT_THROW(cluster_from_json(to_json(fixtures::chain3())), ConfigError);
}

TEST(Serialization, InvalidClusterIsConfigError) {
    json j = cluster_to_json(fixtures::two_servers());
    j["hop_cost"] = json::array({json::array({0, 1}), json::array({2, 0})});
    EXPECT_THROW(cluster_from_json(j), ConfigError);
    j["hop_cost"] = json::array({json::array({0, 1})});
    EXPECT_THROW(cluster_from_json(j), ConfigError);
}

TEST(Serialization, PlacementRecord) {
    RequestRecord r;
    r.request_id = 3;
    r.stage1_done = true;
    r.T = 1.5;
    r.U = 2;
    r.icmp_obj = 1.75;
    r.ms_stage1 = 12.0;
    SchemePair pair;
    const auto j = to_json(r, pair, false);
    EXPECT_EQ(j.at("schema"), "streamplace.placement");
    EXPECT_EQ(j.at("T"), 1.5);
    EXPECT_TRUE(j.at("W").is_null());
    EXPECT_FALSE(j.contains("ms_stage1"));
    EXPECT_TRUE(to_json(r, pair, true).contains("ms_stage1"));
}

TEST(Csv, HeaderAndFormatting) {
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(2.0), "2");
    EXPECT_EQ(format_number(std::nan("")), "");

    SweepPoint p;
    p.value = 0.25;
    RepetitionMetrics m = aggregate(0, {});
    m.ms_stage1 = 99.0;
    p.result.reps.push_back(m);
    std::ostringstream os;
    write_csv(os, {p}, true, false);
    EXPECT_EQ(os.str(), std::string(kCsvHeader) + "\n0.25,0,0,0,,,,,0,0\n");
    std::ostringstream plain;
    write_csv(plain, {p}, false, true);
    EXPECT_EQ(plain.str(), std::string(kCsvHeader) + "\n,0,0,0,,,,,99,0\n");
}

TEST(Serialization, MetricsCarryHeader) {
    ExperimentConfig cfg;
    const auto j = metrics_to_json(cfg, "alpha", {}, false);
    EXPECT_EQ(j.at("schema"), "streamplace.metrics");
    EXPECT_EQ(j.at("schema_version"), kSchemaVersion);
    EXPECT_EQ(j.at("parameter"), "alpha");
}
