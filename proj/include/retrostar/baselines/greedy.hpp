#pragma once

/**
 * Greedy depth-first search: always descends into the cheapest proposal
 * first (highest likelihood under the -log convention), backtracking on
 * dead ends and ancestor cycles, within the model-call budget.
 */

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "retrostar/common.hpp"
#include "retrostar/expansion.hpp"
#include "retrostar/search.hpp"

namespace retrostar {

namespace detail {

struct GreedyState {
    const PlanningInstance* instance;
    std::size_t call_limit;
    std::size_t calls_used = 0;
    std::map<std::string, ExpansionResult> cache;  // one model call per molecule
    bool budget_hit = false;

    const ExpansionResult* expand(const std::string& m) {
        if (auto it = cache.find(m); it != cache.end()) return &it->second;
        if (calls_used >= call_limit) {
            budget_hit = true;
            return nullptr;
        }
        ++calls_used;
        return &cache.emplace(m, instance->expand(m)).first->second;
    }

    bool solve(const std::string& m, std::set<std::string>& path, Route& route) {
        if (instance->available(m)) return true;
        if (path.count(m)) return false;
        const ExpansionResult* result = expand(m);
        if (!result) return false;

        std::vector<std::size_t> order(result->proposals.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return result->proposals[a].cost < result->proposals[b].cost;
        });

        path.insert(m);
        for (std::size_t idx : order) {
            const Proposal& p = result->proposals[idx];
            if (std::any_of(p.reactants.begin(), p.reactants.end(),
                            [&](const std::string& r) { return path.count(r) > 0; }))
                continue;
            const std::size_t mark = route.steps.size();
            const double cost_mark = route.total_cost;
            route.steps.push_back({m, p.reaction, p.cost, p.reactants});
            route.total_cost += p.cost;
            bool ok = true;
            for (const std::string& r : p.reactants) {
                if (!solve(r, path, route)) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                path.erase(m);
                return true;
            }
            route.steps.resize(mark);
            route.total_cost = cost_mark;
            if (budget_hit) break;
        }
        path.erase(m);
        return false;
    }
};

}  // namespace detail

inline SearchOutcome greedy_dfs(const PlanningInstance& instance, const SearchConfig& config) {
    detail::GreedyState st;
    st.instance = &instance;
    st.call_limit = config.call_limit;

    SearchOutcome outcome;
    Route route;
    std::set<std::string> path;
    bool solved = st.solve(instance.target, path, route);
    outcome.calls_used = st.calls_used;
    if (solved) {
        outcome.status = SearchStatus::Solved;
        outcome.route = std::move(route);
        outcome.best_root_rn = outcome.route->total_cost;
    } else {
        outcome.status = st.budget_hit ? SearchStatus::LimitReached : SearchStatus::Exhausted;
    }
    return outcome;
}

}  // namespace retrostar
