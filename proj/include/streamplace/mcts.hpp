#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "streamplace/model.hpp"
#include "streamplace/rng.hpp"

namespace streamplace {

/// Map one unplaced item (instance or container) onto one target
/// (container or server). Ordered by (item, target) for tie-breaking.
struct Action {
    Index item = kUnassigned;
    Index target = kUnassigned;
    friend auto operator<=>(const Action&, const Action&) = default;
};

/// Raised when a stage cannot be completed: no valid sample was gathered for
/// a step, or every branch below the step root is infeasible.
class PlacementFailure : public std::runtime_error {
public:
    PlacementFailure(const std::string& what, std::size_t step, std::size_t placed)
        : std::runtime_error(what), step_(step), placed_(placed) {}
    std::size_t step() const noexcept { return step_; }
    std::size_t placed_items() const noexcept { return placed_; }

private:
    std::size_t step_;
    std::size_t placed_;
};

/// Sequential placement problem searched by the engine.
///
/// A state is a partial assignment. `scan` lists the feasible actions of a
/// state in (item, target) order and reports whether some unplaced item has
/// no feasible target at all (a dead end: loads only grow, so that state can
/// never complete). A leaf is a complete or dead-end state; only complete
/// states satisfy the stage constraints.
template <typename S>
concept PlacementStage = requires(const S& stage, typename S::State& state, const typename S::State& cstate,
                                  Action action, Rng& rng, std::vector<Action>& actions) {
    typename S::State;
    { stage.initial_state() } -> std::convertible_to<typename S::State>;
    { stage.item_count() } -> std::convertible_to<std::size_t>;
    { stage.scan(cstate, actions) } -> std::convertible_to<bool>;
    stage.apply(state, action);
    { stage.is_complete(cstate) } -> std::convertible_to<bool>;
    { stage.objective(cstate) } -> std::convertible_to<double>;
    { stage.greedy_action(cstate, rng) } -> std::convertible_to<std::optional<Action>>;
    { stage.expansion_score(cstate, action) } -> std::convertible_to<int>;
    { stage.prior_cost() } -> std::convertible_to<double>;
};

enum class RolloutPolicy { uniform, greedy };
enum class ExpansionPolicy { uniform, scored };

struct MctsConfig {
    std::size_t max_samples_per_step = 500;
    double exploration_weight = std::sqrt(2.0);
    RolloutPolicy rollout = RolloutPolicy::greedy;
    ExpansionPolicy expansion = ExpansionPolicy::scored;
    bool prior_bias = true;
    std::optional<double> prior_q;  // defaults to the stage's upper bound on leaf cost
    std::size_t max_attempts_factor = 10;

    void validate() const {
        if (!(exploration_weight >= 0.0)) throw std::invalid_argument("exploration weight must be >= 0");
        if (max_attempts_factor == 0) throw std::invalid_argument("max_attempts_factor must be positive");
        if (prior_q && !(*prior_q >= 0.0)) throw std::invalid_argument("prior_q must be >= 0");
    }
};

/// Minimum-UCB1 score: Q/(N+1) - omega * sqrt(2 ln(N_parent) / N).
/// Unvisited nodes score -infinity so they are chosen first.
inline double ucb1_score(double node_q, double node_n, double parent_n, double omega) {
    if (node_q < 0.0 || node_n < 0.0 || parent_n < 0.0 || omega < 0.0) {
        throw std::invalid_argument("ucb1_score takes nonnegative inputs");
    }
    if (node_n == 0.0) return -std::numeric_limits<double>::infinity();
    if (parent_n < 1.0) throw std::invalid_argument("ucb1_score needs parent visits >= 1 for a visited node");
    const double exploit = node_q / (node_n + 1.0);
    if (omega == 0.0) return exploit;
    return exploit - omega * std::sqrt(2.0 * std::log(parent_n) / node_n);
}

struct SearchNode {
    struct Untried {
        Action action;
        int score = 0;
    };

    Action action;  // generating action; unset for the initial root
    SearchNode* parent = nullptr;
    std::uint64_t visits = 0;  // N
    double total = 0.0;        // Q
    std::uint64_t prior_visits = 0;

    bool initialized = false;  // untried list built
    bool leaf = false;
    bool dead = false;  // no valid completion below this node
    std::vector<Untried> untried;
    std::vector<std::unique_ptr<SearchNode>> children;

    std::uint64_t sampled_visits() const noexcept { return visits - prior_visits; }
    bool fully_expanded() const noexcept { return initialized && untried.empty(); }
};

struct SearchStats {
    std::size_t accepted_samples = 0;
    std::size_t attempts = 0;
};

/// Monte Carlo tree search over one placement stage. Owns its tree; the
/// step root advances to the chosen child after each decision and keeps
/// that child's subtree statistics.
template <PlacementStage Stage>
class Search {
public:
    using State = typename Stage::State;

    Search(const Stage& stage, MctsConfig cfg, std::uint64_t seed)
        : stage_(&stage), cfg_(std::move(cfg)), rng_(seed), root_state_(stage.initial_state()) {
        cfg_.validate();
        prior_q_ = cfg_.prior_q ? *cfg_.prior_q : stage.prior_cost();
        root_ = std::make_unique<SearchNode>();
        initialize(*root_, root_state_);
    }

    const SearchNode& root() const noexcept { return *root_; }
    const State& root_state() const noexcept { return root_state_; }
    const MctsConfig& config() const noexcept { return cfg_; }
    const SearchStats& stats() const noexcept { return stats_; }
    Rng& rng() noexcept { return rng_; }

    /// Descends by best_child while nodes are fully expanded; expands the
    /// first node with untried actions. `state` starts as the root state
    /// and is advanced along the path. Returns nullptr when the descent
    /// proves a subtree dead.
    SearchNode* traverse(State& state) {
        SearchNode* node = root_.get();
        for (;;) {
            if (node->leaf) return node;
            if (!node->untried.empty()) return expand(*node, state);
            SearchNode* next = select_child(*node, cfg_.exploration_weight);
            if (next == nullptr) {
                mark_dead(*node);
                return nullptr;
            }
            stage_->apply(state, next->action);
            node = next;
        }
    }

    /// Adds one untried child. Scored expansion chooses uniformly among the
    /// highest-scoring untried actions; uniform expansion ignores scores.
    SearchNode* expand(SearchNode& node, State& state) {
        if (node.untried.empty()) throw std::logic_error("expand called on a node without untried actions");
        std::size_t pick = 0;
        if (cfg_.expansion == ExpansionPolicy::uniform) {
            pick = rng_.uniform_index(node.untried.size());
        } else {
            int best = std::numeric_limits<int>::min();
            for (const auto& u : node.untried) best = std::max(best, u.score);
            candidates_.clear();
            for (std::size_t k = 0; k < node.untried.size(); ++k) {
                if (node.untried[k].score == best) candidates_.push_back(k);
            }
            pick = candidates_[rng_.uniform_index(candidates_.size())];
        }
        const auto chosen = node.untried[pick];
        node.untried.erase(node.untried.begin() + static_cast<std::ptrdiff_t>(pick));

        auto child = std::make_unique<SearchNode>();
        child->action = chosen.action;
        child->parent = &node;
        if (cfg_.prior_bias && chosen.score == 0) {
            child->visits = 1;
            child->prior_visits = 1;
            child->total = prior_q_;
        }
        stage_->apply(state, chosen.action);
        initialize(*child, state);
        node.children.push_back(std::move(child));
        return node.children.back().get();
    }

    /// Completes `state` with the configured rollout policy. Returns the leaf
    /// objective, or nullopt when the rollout ends in an invalid mapping.
    std::optional<double> simulate(State& state) {
        std::vector<Action>& actions = scratch_;
        for (;;) {
            if (stage_->is_complete(state)) return stage_->objective(state);
            if (cfg_.rollout == RolloutPolicy::greedy) {
                const auto a = stage_->greedy_action(state, rng_);
                if (!a) return std::nullopt;
                stage_->apply(state, *a);
            } else {
                const bool dead_end = !stage_->scan(state, actions);
                if (dead_end || actions.empty()) return std::nullopt;
                stage_->apply(state, actions[rng_.uniform_index(actions.size())]);
            }
        }
    }

    /// N += 1 and Q += reward for the node and every ancestor, step root included.
    static void back_prop(SearchNode* node, double reward) {
        for (; node != nullptr; node = node->parent) {
            node->visits += 1;
            node->total += reward;
        }
    }

    /// Visited child minimising ucb1_score; dead children are skipped and
    /// ties go to the smallest action. Throws PlacementFailure at a dead end.
    const SearchNode& best_child(const SearchNode& node, double omega) const {
        const SearchNode* child = select_child(node, omega);
        if (child == nullptr) throw PlacementFailure("dead end: node has no live children", 0, 0);
        return *child;
    }

    /// One sampling round: traverse, simulate, back-propagate when valid.
    /// Returns true when the sample was accepted.
    bool sample_once() {
        ++stats_.attempts;
        State state = root_state_;
        SearchNode* node = traverse(state);
        if (node == nullptr) return false;
        if (node->dead) {
            mark_dead(*node);
            return false;
        }
        const auto reward = simulate(state);
        if (!reward) {
            if (node->leaf) mark_dead(*node);
            return false;
        }
        back_prop(node, *reward);
        ++stats_.accepted_samples;
        return true;
    }

    /// Samples until max_samples_per_step valid samples (or the attempt cap),
    /// then commits to the visited child with the lowest mean cost and
    /// re-roots the tree there.
    Action next_action() {
        const std::size_t placed = placed_items_;
        if (root_->leaf) throw PlacementFailure("no feasible action at step " + std::to_string(placed), placed, placed);
        const std::size_t budget = cfg_.max_samples_per_step;
        if (budget == 0) throw PlacementFailure("sample budget is zero", placed, placed);
        const std::size_t max_attempts = budget * cfg_.max_attempts_factor;
        std::size_t accepted = 0;
        for (std::size_t attempt = 0; accepted < budget && attempt < max_attempts && !root_->dead; ++attempt) {
            if (sample_once()) ++accepted;
        }
        if (accepted == 0 && !has_sampled_child(*root_)) {
            throw PlacementFailure("no valid sample at step " + std::to_string(placed), placed, placed);
        }

        SearchNode* chosen = nullptr;
        double best = std::numeric_limits<double>::infinity();
        for (auto& child : root_->children) {
            if (child->dead || child->sampled_visits() == 0) continue;
            const double score = ucb1_score(child->total, static_cast<double>(child->visits), 1.0, 0.0);
            if (chosen == nullptr || score < best || (score == best && child->action < chosen->action)) {
                chosen = child.get();
                best = score;
            }
        }
        if (chosen == nullptr) {
            throw PlacementFailure("no live child with samples at step " + std::to_string(placed), placed, placed);
        }

        const Action action = chosen->action;
        std::unique_ptr<SearchNode> next;
        for (auto& child : root_->children) {
            if (child.get() == chosen) next = std::move(child);
        }
        next->parent = nullptr;
        root_ = std::move(next);
        stage_->apply(root_state_, action);
        ++placed_items_;
        return action;
    }

    /// Runs next_action once per item; returns the action sequence.
    std::vector<Action> run() {
        std::vector<Action> sequence;
        const std::size_t n = stage_->item_count();
        sequence.reserve(n);
        while (sequence.size() < n) sequence.push_back(next_action());
        return sequence;
    }

private:
    void initialize(SearchNode& node, const State& state) {
        node.initialized = true;
        if (stage_->is_complete(state)) {
            node.leaf = true;
            return;
        }
        const bool ok = stage_->scan(state, scratch_);
        if (!ok || scratch_.empty()) {
            node.leaf = true;
            node.dead = true;
            return;
        }
        node.untried.reserve(scratch_.size());
        for (const Action& a : scratch_) node.untried.push_back({a, stage_->expansion_score(state, a)});
    }

    SearchNode* select_child(const SearchNode& node, double omega) const {
        SearchNode* chosen = nullptr;
        double best = std::numeric_limits<double>::infinity();
        const double parent_n = std::max<double>(1.0, static_cast<double>(node.visits));
        for (const auto& child : node.children) {
            if (child->dead) continue;
            const double score = ucb1_score(child->total, static_cast<double>(child->visits), parent_n, omega);
            if (chosen == nullptr || score < best || (score == best && child->action < chosen->action)) {
                chosen = child.get();
                best = score;
            }
        }
        return chosen;
    }

    static bool has_sampled_child(const SearchNode& node) {
        return std::any_of(node.children.begin(), node.children.end(),
                           [](const auto& c) { return !c->dead && c->sampled_visits() > 0; });
    }

    // A node is dead when it is an invalid leaf, or fully expanded with
    // every child dead. Propagates upwards as far as that holds.
    static void mark_dead(SearchNode& node) {
        node.dead = true;
        for (SearchNode* p = node.parent; p != nullptr; p = p->parent) {
            if (!p->untried.empty()) return;
            const bool all_dead =
                std::all_of(p->children.begin(), p->children.end(), [](const auto& c) { return c->dead; });
            if (!all_dead) return;
            p->dead = true;
        }
    }

    const Stage* stage_;
    MctsConfig cfg_;
    Rng rng_;
    State root_state_;
    std::unique_ptr<SearchNode> root_;
    double prior_q_ = 0.0;
    std::size_t placed_items_ = 0;
    SearchStats stats_;
    std::vector<Action> scratch_;
    std::vector<std::size_t> candidates_;
};

}  // namespace streamplace
