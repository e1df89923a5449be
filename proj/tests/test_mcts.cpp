#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "fixtures.hpp"
#include "streamplace/mcts.hpp"
#include "streamplace/oracle.hpp"
#include "streamplace/stages.hpp"

using namespace streamplace;
using fixtures::rv;

namespace {

// IcmpStage that logs every leaf objective handed back to the search.
class RecordingStage {
public:
    using State = IcmpStage::State;

    RecordingStage(const IcmpStage& inner, std::vector<double>& log) : inner_(&inner), log_(&log) {}

    State initial_state() const { return inner_->initial_state(); }
    std::size_t item_count() const { return inner_->item_count(); }
    bool scan(const State& s, std::vector<Action>& out) const { return inner_->scan(s, out); }
    void apply(State& s, Action a) const { inner_->apply(s, a); }
    bool is_complete(const State& s) const { return inner_->is_complete(s); }
    double objective(const State& s) const {
        const double v = inner_->objective(s);
        log_->push_back(v);
        return v;
    }
    std::optional<Action> greedy_action(const State& s, Rng& rng) const { return inner_->greedy_action(s, rng); }
    int expansion_score(const State& s, Action a) const { return inner_->expansion_score(s, a); }
    double prior_cost() const { return inner_->prior_cost(); }

private:
    const IcmpStage* inner_;
    std::vector<double>* log_;
};

static_assert(PlacementStage<RecordingStage>);

std::unique_ptr<SearchNode> make_child(SearchNode& parent, Action a, std::uint64_t n, double q) {
    auto c = std::make_unique<SearchNode>();
    c->action = a;
    c->parent = &parent;
    c->visits = n;
    c->total = q;
    c->initialized = true;
    return c;
}

MctsConfig config(std::size_t samples, bool prior = true) {
    MctsConfig cfg;
    cfg.max_samples_per_step = samples;
    cfg.prior_bias = prior;
    return cfg;
}

}  // namespace

TEST(Ucb1, HandComputedValues) {
    EXPECT_EQ(ucb1_score(5.0, 0.0, 10.0, 1.0), -std::numeric_limits<double>::infinity());
    EXPECT_NEAR(ucb1_score(10.0, 4.0, 8.0, 0.0), 2.0, 1e-12);
    // 2 - sqrt(2) * sqrt(2 ln 8 / 4) = 2 - sqrt(ln 8)
    EXPECT_NEAR(ucb1_score(10.0, 4.0, 8.0, std::sqrt(2.0)), 0.557973113399117, 1e-12);
    EXPECT_NEAR(ucb1_score(3.0, 2.0, 1.0, 1.0), 1.0, 1e-12);  // ln 1 = 0
    // 6/4 - 0.5 * sqrt(2 ln 20 / 3) = 1.5 - 0.5 * 1.41333...
    EXPECT_NEAR(ucb1_score(6.0, 3.0, 20.0, 0.5), 1.5 - 0.5 * std::sqrt(2.0 * std::log(20.0) / 3.0), 1e-12);
    EXPECT_NEAR(ucb1_score(6.0, 3.0, 20.0, 0.5), 0.7933963541991886, 1e-12);
}

TEST(Ucb1, RejectsBadInputs) {
    EXPECT_THROW(ucb1_score(-1.0, 1.0, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(ucb1_score(1.0, -1.0, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(ucb1_score(1.0, 1.0, 1.0, -1.0), std::invalid_argument);
    EXPECT_THROW(ucb1_score(1.0, 1.0, 0.0, 1.0), std::invalid_argument);
}

TEST(BestChild, SelectionRules) {
    const auto req = fixtures::diamond();
    const IcmpStage stage(req, ObjectiveConfig(0.5));
    Search<IcmpStage> search(stage, config(10), 1);

    SearchNode parent;
    parent.visits = 4;
    parent.initialized = true;
    parent.children.push_back(make_child(parent, {0, 1}, 1, 4.0));  // mean cost 2.0
    EXPECT_EQ(search.best_child(parent, 0.0).action, (Action{0, 1}));
    parent.children.push_back(make_child(parent, {0, 2}, 1, 3.0));  // 1.5
    EXPECT_EQ(search.best_child(parent, 0.0).action, (Action{0, 2}));
    parent.children.push_back(make_child(parent, {0, 0}, 1, 3.0));  // tie -> smaller action
    EXPECT_EQ(search.best_child(parent, 0.0).action, (Action{0, 0}));

    // biased child (N=1, large Q) loses to an unvisited sibling
    SearchNode p2;
    p2.visits = 1;
    p2.children.push_back(make_child(p2, {0, 0}, 1, 1e6));
    p2.children.back()->prior_visits = 1;
    p2.children.push_back(make_child(p2, {0, 2}, 0, 0.0));
    EXPECT_EQ(search.best_child(p2, std::sqrt(2.0)).action, (Action{0, 2}));

    SearchNode empty;
    EXPECT_THROW(search.best_child(empty, 1.0), PlacementFailure);
}

TEST(BackProp, AccumulatesToRoot) {
    SearchNode root;
    auto child = make_child(root, {0, 0}, 0, 0.0);
    Search<IcmpStage>::back_prop(child.get(), 3.0);
    EXPECT_EQ(child->visits, 1u);
    EXPECT_EQ(root.visits, 1u);
    EXPECT_DOUBLE_EQ(root.total, 3.0);

    SearchNode node;
    Search<IcmpStage>::back_prop(&node, 2.0);
    Search<IcmpStage>::back_prop(&node, 4.0);
    EXPECT_DOUBLE_EQ(node.total, 6.0);
    EXPECT_EQ(node.visits, 2u);
    Search<IcmpStage>::back_prop(&node, 0.0);
    EXPECT_EQ(node.visits, 3u);
    EXPECT_DOUBLE_EQ(node.total, 6.0);
}

TEST(Traverse, LeafRootAndFreshExpansion) {
    const auto empty = AppRequest(0, {}, {}, {}, {{0, rv(1, 1)}});
    const IcmpStage s0(empty, ObjectiveConfig(0.5));
    Search<IcmpStage> leaf_search(s0, config(5), 1);
    auto st = s0.initial_state();
    EXPECT_EQ(leaf_search.traverse(st), &leaf_search.root());

    const auto req = fixtures::diamond();
    const IcmpStage stage(req, ObjectiveConfig(0.5));
    Search<IcmpStage> search(stage, config(5), 1);
    auto state = stage.initial_state();
    SearchNode* node = search.traverse(state);
    ASSERT_NE(node, nullptr);
    EXPECT_EQ(node->parent, &search.root());
    EXPECT_EQ(search.root().children.size(), 1u);
    EXPECT_EQ(stage.to_assignment(state)[node->action.item], node->action.target);
}

TEST(Traverse, DescendsThroughFullyExpandedRoot) {
    // two instances, one container: the root has two actions
    const auto req = expand_request(0, {1, 1}, {rv(1, 1), rv(1, 1)}, {{0, 1, 1.0}}, 1, rv(2, 2));
    const IcmpStage stage(req, ObjectiveConfig(0.5));
    Search<IcmpStage> search(stage, config(5, false), 1);
    auto s1 = stage.initial_state();
    SearchNode* first = search.traverse(s1);
    ASSERT_NE(first, nullptr);
    Search<IcmpStage>::back_prop(first, 1.0);
    auto s2 = stage.initial_state();
    SearchNode* second = search.traverse(s2);
    ASSERT_NE(second, nullptr);
    Search<IcmpStage>::back_prop(second, 1.0);
    auto s3 = stage.initial_state();
    SearchNode* third = search.traverse(s3);
    ASSERT_NE(third, nullptr);
    EXPECT_NE(third->parent, &search.root());  // root fully expanded: descended
}

TEST(Expand, SingleUntriedAndScoredPreference) {
    const auto req = expand_request(0, {1}, {rv(1, 1)}, {}, 1, rv(1, 1));
    const IcmpStage stage(req, ObjectiveConfig(0.5));
    Search<IcmpStage> search(stage, config(5), 1);
    auto state = stage.initial_state();
    SearchNode* child = search.traverse(state);
    EXPECT_EQ(child->action, (Action{0, 0}));

    // chain A -> B (2 instances each) in 2 containers; after placing
    // instance 0 in container 0, co-locating a B instance scores 1.
    const auto chain = expand_request(0, {2, 2}, {rv(1, 1), rv(1, 1)}, {{0, 1, 4.0}}, 2, rv(4, 4));
    const IcmpStage cs(chain, ObjectiveConfig(1.0));
    auto st = cs.initial_state();
    cs.apply(st, {0, 0});
    EXPECT_EQ(cs.expansion_score(st, {2, 0}), 1);
    EXPECT_EQ(cs.expansion_score(st, {2, 1}), 0);
    EXPECT_EQ(cs.expansion_score(st, {1, 0}), 0);  // same component is not stream-adjacent

    // Every first child expanded below a non-empty state is a scored action.
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Search<IcmpStage> s(cs, config(30), seed);
        s.next_action();
        const auto& root = s.root();
        if (root.children.empty()) continue;
        int best = 0;
        std::vector<Action> acts;
        cs.scan(s.root_state(), acts);
        for (const auto& a : acts) best = std::max(best, cs.expansion_score(s.root_state(), a));
        EXPECT_EQ(cs.expansion_score(s.root_state(), root.children.front()->action), best);
    }
}

TEST(Simulate, LeafStuckAndGreedyChain) {
    const auto req = expand_request(0, {1}, {rv(1, 1)}, {}, 2, rv(1, 1));
    const IcmpStage stage(req, ObjectiveConfig(0.5));
    Search<IcmpStage> search(stage, config(5), 1);
    auto done = stage.initial_state();
    stage.apply(done, {0, 1});
    EXPECT_EQ(search.simulate(done), std::optional<double>(0.5));

    // three (2,2) instances into two (3,3) containers cannot be completed
    const auto stuck = expand_request(0, {3}, {rv(2, 2)}, {}, 2, rv(3, 3));
    const IcmpStage ss(stuck, ObjectiveConfig(0.5));
    for (auto rollout : {RolloutPolicy::greedy, RolloutPolicy::uniform}) {
        auto cfg = config(5);
        cfg.rollout = rollout;
        Search<IcmpStage> s(ss, cfg, 3);
        auto st = ss.initial_state();
        EXPECT_EQ(s.simulate(st), std::nullopt);
    }

    // chain with ample capacity, alpha = 1: greedy keeps everything together
    const auto chain = expand_request(0, {2, 3, 2}, {rv(1, 1), rv(1, 1), rv(1, 1)}, {{0, 1, 2.0}, {1, 2, 3.0}}, 3, rv(10, 10));
    const IcmpStage cs(chain, ObjectiveConfig(1.0));
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Search<IcmpStage> s(cs, config(5), seed);
        auto st = cs.initial_state();
        EXPECT_EQ(s.simulate(st), std::optional<double>(0.0));
    }
}

TEST(NextAction, TrivialAndZeroBudget) {
    const auto one = expand_request(0, {1}, {rv(1, 1)}, {}, 1, rv(1, 1));
    const IcmpStage stage(one, ObjectiveConfig(0.5));
    Search<IcmpStage> search(stage, config(3), 1);
    EXPECT_EQ(search.next_action(), (Action{0, 0}));

    Search<IcmpStage> none(stage, config(0), 1);
    EXPECT_THROW(none.next_action(), PlacementFailure);
}

TEST(NextAction, CoLocatesTwoInstances) {
    const auto req = expand_request(0, {1, 1}, {rv(1, 1), rv(1, 1)}, {{0, 1, 3.0}}, 2, rv(2, 2));
    const auto opt = brute_force_icmp(req, ObjectiveConfig(1.0));
    ASSERT_DOUBLE_EQ(opt.value, 0.0);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto r = run_mcts_icmp(req, ObjectiveConfig(1.0), config(100), seed);
        EXPECT_EQ(r.assignment[0], r.assignment[1]);
        EXPECT_DOUBLE_EQ(r.objective, 0.0);
    }
}

TEST(RunStage, EmptyAndSingle) {
    const auto empty = AppRequest(0, {}, {}, {}, {{0, rv(1, 1)}});
    EXPECT_TRUE(run_mcts_icmp(empty, ObjectiveConfig(0.5), config(10), 1).assignment.target_of.empty());
    const auto one = expand_request(0, {1}, {rv(1, 1)}, {}, 1, rv(1, 1));
    EXPECT_EQ(run_mcts_icmp(one, ObjectiveConfig(0.5), config(10), 1).assignment.target_of, std::vector<Index>{0});
}

TEST(RunStage, InfeasibleRequestFails) {
    const auto stuck = expand_request(0, {3}, {rv(2, 2)}, {}, 2, rv(3, 3));
    EXPECT_THROW(run_mcts_icmp(stuck, ObjectiveConfig(0.5), config(20), 1), PlacementFailure);
    const auto req = expand_request(0, {1}, {rv(1, 1)}, {}, 1, rv(5, 5));
    IcmpAssignment x(0, 1);
    x.target_of = {0};
    const auto full = fixtures::uniform_cluster(2, rv(4, 4), 1);
    EXPECT_THROW(run_mcts_csmp(full, req, x, config(20), 1), PlacementFailure);
}

// Two (4,4) containers hold the diamond only as {A, D} + {B, C}.
TEST(RunStage, TightDiamondNearOptimal) {
    const auto req = expand_request(0, {1, 1, 1, 1}, {rv(2, 2), rv(3, 3), rv(1, 1), rv(2, 2)},
                                    {{0, 1, 1.0}, {0, 2, 1.0}, {1, 3, 1.0}, {2, 3, 3.0}}, 2, rv(4, 4));
    const ObjectiveConfig cfg(0.5);
    const auto opt = brute_force_icmp(req, cfg);
    ASSERT_TRUE(opt.feasible);
    int within = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto r = run_mcts_icmp(req, cfg, config(500), seed);
        ASSERT_TRUE(validate_icmp(req, r.assignment, false));
        if (r.objective <= opt.value * 1.05 + 1e-9) ++within;
    }
    EXPECT_GE(within, 95);
}

TEST(Search, RootCountsAcceptedSamples) {
    const auto req = fixtures::diamond();
    const IcmpStage stage(req, ObjectiveConfig(0.5));
    Search<IcmpStage> search(stage, config(200, false), 4);
    std::uint64_t before = search.root().visits;
    std::size_t accepted = 0;
    for (int k = 0; k < 150; ++k) accepted += search.sample_once() ? 1 : 0;
    EXPECT_EQ(search.root().visits - before, accepted);
    std::uint64_t child_sum = 0;
    for (const auto& c : search.root().children) child_sum += c->visits;
    EXPECT_LE(child_sum, search.root().visits);
}

TEST(Search, PriorBiasKeepsSampledCountsBounded) {
    const auto req = fixtures::diamond();
    const IcmpStage stage(req, ObjectiveConfig(0.5));
    Search<IcmpStage> search(stage, config(200, true), 4);
    for (int step = 0; step < 3; ++step) {
        search.next_action();
        std::uint64_t sampled = 0;
        for (const auto& c : search.root().children) sampled += c->sampled_visits();
        EXPECT_LE(sampled, search.root().sampled_visits());
    }
}

TEST(Search, MeanCostEqualsMeanOfBackPropagatedRewards) {
    const auto req = fixtures::diamond();
    const IcmpStage inner(req, ObjectiveConfig(0.5));
    std::vector<double> log;
    const RecordingStage stage(inner, log);
    Search<RecordingStage> search(stage, config(300, false), 8);
    for (int k = 0; k < 300; ++k) search.sample_once();
    ASSERT_EQ(log.size(), search.root().visits);
    const double mean = std::accumulate(log.begin(), log.end(), 0.0) / static_cast<double>(log.size());
    EXPECT_NEAR(search.root().total / static_cast<double>(search.root().visits), mean, 1e-9);
}

TEST(Search, TreeReuseKeepsChosenSubtree) {
    const auto req = fixtures::diamond();
    const IcmpStage stage(req, ObjectiveConfig(0.5));
    const auto cfg = config(100);

    // Replay the sampling loop by hand with the same seed.
    Search<IcmpStage> manual(stage, cfg, 12);
    std::size_t accepted = 0;
    for (std::size_t attempt = 0; accepted < 100 && attempt < 1000 && !manual.root().dead; ++attempt) {
        if (manual.sample_once()) ++accepted;
    }
    const SearchNode* expect = nullptr;
    for (const auto& c : manual.root().children) {
        if (c->dead || c->sampled_visits() == 0) continue;
        const double m = c->total / static_cast<double>(c->visits + 1);
        const double e = expect ? expect->total / static_cast<double>(expect->visits + 1) : 0.0;
        if (expect == nullptr || m < e || (m == e && c->action < expect->action)) expect = c.get();
    }
    ASSERT_NE(expect, nullptr);

    Search<IcmpStage> search(stage, cfg, 12);
    EXPECT_EQ(search.next_action(), expect->action);
    EXPECT_EQ(search.root().parent, nullptr);
    EXPECT_EQ(search.root().visits, expect->visits);
    EXPECT_DOUBLE_EQ(search.root().total, expect->total);
    EXPECT_EQ(search.root().children.size(), expect->children.size());
}

TEST(Search, DeterministicGivenSeed) {
    fixtures::Rng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const auto req = fixtures::random_request(rng, 5, 3, 4, 6.0);
        const auto a = [&] {
            try {
                return run_mcts_icmp(req, ObjectiveConfig(0.5), config(50), 1234).assignment;
            } catch (const PlacementFailure&) {
                return IcmpAssignment();
            }
        };
        EXPECT_EQ(a(), a());
    }
}

TEST(Search, ReturnedAssignmentsAreFeasible) {
    fixtures::Rng rng(100);
    for (int trial = 0; trial < 60; ++trial) {
        const auto req = fixtures::random_request(rng, 5, 3, 4, 6.0);
        const auto cl = fixtures::random_cluster(rng, 4, 6, 20);
        for (auto rollout : {RolloutPolicy::greedy, RolloutPolicy::uniform}) {
            auto cfg = config(40);
            cfg.rollout = rollout;
            cfg.expansion = trial % 2 ? ExpansionPolicy::scored : ExpansionPolicy::uniform;
            try {
                const auto x = run_mcts_icmp(req, ObjectiveConfig(0.5), cfg, static_cast<std::uint64_t>(trial));
                EXPECT_TRUE(validate_icmp(req, x.assignment, false));
                EXPECT_NEAR(x.objective, icmp_objective(req, x.assignment, ObjectiveConfig(0.5)), 1e-9);
                const auto red = eliminate_empty_containers(req, x.assignment);
                const auto y = run_mcts_csmp(cl, red.request, red.icmp, cfg, static_cast<std::uint64_t>(trial));
                EXPECT_TRUE(validate_csmp(cl, red.request, y.assignment, false));
                EXPECT_NEAR(y.objective, csmp_objective(cl, red.request, red.icmp, y.assignment), 1e-9);
            } catch (const PlacementFailure&) {
            }
        }
    }
}

TEST(Search, CsmpFindsFixtureOptimum) {
    const auto req = fixtures::chain3();
    const auto x = fixtures::chain3_spread();
    const auto cl = fixtures::two_servers();
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto y = run_mcts_csmp(cl, req, x, config(200), seed);
        EXPECT_DOUBLE_EQ(y.objective, 1.0);
    }
}
