#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "streamplace/model.hpp"
#include "streamplace/objectives.hpp"

namespace streamplace {

/// Raised when an exhaustive search would exceed its enumeration cap.
class OracleRefusal : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultOracleCap = 1e7;

template <typename Assignment>
struct OracleResult {
    bool feasible = false;
    Assignment assignment;
    double value = std::numeric_limits<double>::infinity();
};

namespace detail {

inline void check_oracle_cap(std::size_t targets, std::size_t items, double cap) {
    const double space = std::pow(static_cast<double>(targets), static_cast<double>(items));
    if (space > cap) {
        throw OracleRefusal("exhaustive search space " + std::to_string(targets) + "^" + std::to_string(items) +
                            " exceeds cap " + std::to_string(cap));
    }
}

// Depth-first enumeration in lexicographic order of the placement vector;
// capacity-violating prefixes are pruned. Only strictly better values
// replace the incumbent, so ties resolve to the lexicographically smallest.
template <typename Assignment, typename Demand, typename Fits, typename Evaluate>
void enumerate(std::size_t item, std::size_t targets, std::vector<ResourceVector>& load, Assignment& current,
               const Demand& demand, const Fits& fits, const Evaluate& evaluate, OracleResult<Assignment>& best) {
    if (item == current.size()) {
        const double value = evaluate(current);
        if (!best.feasible || value < best.value - kTolerance) {
            best.feasible = true;
            best.value = value;
            best.assignment = current;
        }
        return;
    }
    for (std::size_t t = 0; t < targets; ++t) {
        load[t] += demand(item);
        if (fits(t, load[t])) {
            current.assign(static_cast<Index>(item), static_cast<Index>(t));
            enumerate(item + 1, targets, load, current, demand, fits, evaluate, best);
            current.unassign(static_cast<Index>(item));
        }
        load[t] -= demand(item);
    }
}

}  // namespace detail

/// Exhaustive instance-to-container optimum. Refuses when |C|^|I| > cap.
inline OracleResult<IcmpAssignment> brute_force_icmp(const AppRequest& req, const ObjectiveConfig& cfg,
                                                     double cap = kDefaultOracleCap) {
    detail::check_oracle_cap(req.container_count(), req.instance_count(), cap);
    OracleResult<IcmpAssignment> best;
    IcmpAssignment current = IcmpAssignment::empty_for(req);
    std::vector<ResourceVector> load(req.container_count(), ResourceVector(req.dims()));
    detail::enumerate(
        0, req.container_count(), load, current,
        [&](std::size_t i) -> const ResourceVector& { return req.instances()[i].demand; },
        [&](std::size_t c, const ResourceVector& l) { return l.fits_within(req.containers()[c].capacity); },
        [&](const IcmpAssignment& a) { return icmp_objective(req, a, cfg); }, best);
    return best;
}

/// Exhaustive container-to-server optimum for a fixed instance placement.
/// Refuses when |S|^|C| > cap.
inline OracleResult<CsmpAssignment> brute_force_csmp(const ClusterState& state, const AppRequest& req,
                                                     const IcmpAssignment& icmp, double cap = kDefaultOracleCap) {
    detail::check_oracle_cap(state.server_count(), req.container_count(), cap);
    const ContainerTraffic traffic(req, icmp);
    OracleResult<CsmpAssignment> best;
    CsmpAssignment current = CsmpAssignment::empty_for(req);
    std::vector<ResourceVector> load(state.server_count(), ResourceVector(state.dims()));
    detail::enumerate(
        0, state.server_count(), load, current,
        [&](std::size_t c) -> const ResourceVector& { return req.containers()[c].capacity; },
        [&](std::size_t s, const ResourceVector& l) { return l.fits_within(state.free(static_cast<Index>(s))); },
        [&](const CsmpAssignment& a) { return csmp_objective(state, traffic, a); }, best);
    return best;
}

}  // namespace streamplace
