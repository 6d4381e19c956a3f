#pragma once

/**
 * Best-first search over the AND-OR tree: select the frontier molecule
 * with minimal V_t, expand it with one call to the one-step model, update
 * the tree, repeat until a halting condition or the call budget is hit.
 *
 * FirstSolution halts as soon as the root is solved. Optimal keeps
 * searching until the cost of a found route is no larger than the minimal
 * V_t on the frontier, which guarantees optimality whenever the value
 * oracle lowerbounds the true synthesis costs (vm = 0 always qualifies).
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "retrostar/common.hpp"
#include "retrostar/expansion.hpp"
#include "retrostar/tree.hpp"

namespace retrostar {

enum class HaltMode { FirstSolution, Optimal };

enum class SearchStatus { Solved, Exhausted, LimitReached };

struct SearchConfig {
    std::size_t call_limit = 500;
    HaltMode halt_mode = HaltMode::FirstSolution;
    bool cycle_filter = true;
};

struct IterationRecord {
    std::size_t iteration;
    std::string molecule;
    double vt_at_selection;
};

struct SearchOutcome {
    SearchStatus status = SearchStatus::Exhausted;
    std::optional<Route> route;
    std::size_t calls_used = 0;
    double best_root_rn = kInf;
    std::vector<IterationRecord> iterations_log;
};

namespace detail {

/// Drop proposals that contain a reactant already on the path to the root
/// (including the expanded molecule itself), preventing trivial descent.
inline ExpansionResult filter_cycles(const SearchTree& tree, NodeId m,
                                     const ExpansionResult& result) {
    auto path = tree.ancestor_molecules(m);
    ExpansionResult filtered;
    for (const Proposal& p : result.proposals) {
        bool cyclic = std::any_of(p.reactants.begin(), p.reactants.end(),
                                  [&](const std::string& r) {
                                      return std::find(path.begin(), path.end(), r) != path.end();
                                  });
        if (!cyclic) filtered.proposals.push_back(p);
    }
    return filtered;
}

}  // namespace detail

inline SearchOutcome run_search(const PlanningInstance& instance,
                                const SearchTree::ValueFn& vm,
                                const SearchConfig& config) {
    SearchTree tree(instance.target, instance.available, vm);
    SearchOutcome outcome;

    auto finish = [&](SearchStatus status) {
        outcome.status = status;
        outcome.best_root_rn = tree.node(tree.root()).rn;
        if (status == SearchStatus::Solved) outcome.route = tree.extract_best_route();
        return outcome;
    };

    auto halted = [&]() {
        if (!tree.node(tree.root()).is_solved) return false;
        if (config.halt_mode == HaltMode::FirstSolution) return true;
        Route route = tree.extract_best_route();
        return route.total_cost <= tree.frontier_min_vt();
    };

    if (halted()) return finish(SearchStatus::Solved);

    while (!tree.frontier_empty()) {
        if (outcome.calls_used >= config.call_limit)
            return finish(tree.node(tree.root()).is_solved ? SearchStatus::Solved
                                                           : SearchStatus::LimitReached);
        NodeId next = tree.select_next();
        outcome.iterations_log.push_back(
            {outcome.calls_used + 1, tree.node(next).label, tree.vt_of(next)});

        ExpansionResult result = instance.expand(tree.node(next).label);
        ++outcome.calls_used;
        if (config.cycle_filter) result = detail::filter_cycles(tree, next, result);

        tree.expand(next, result);
        tree.update(next, result);

        if (halted()) return finish(SearchStatus::Solved);
    }
    return finish(tree.node(tree.root()).is_solved ? SearchStatus::Solved
                                                   : SearchStatus::Exhausted);
}

/// Checks the optimality guarantee: a Solved outcome under Optimal halting
/// with a lowerbounding oracle must match the known optimal cost.
inline bool verify_admissible_halt(const SearchOutcome& outcome, double optimal_cost) {
    if (outcome.status != SearchStatus::Solved || !outcome.route) return false;
    return std::abs(outcome.route->total_cost - optimal_cost) <= 1e-9;
}

}  // namespace retrostar
