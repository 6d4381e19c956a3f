#pragma once

/**
 * Exhaustive optimal-plan oracle: opt(m) = 0 for available molecules,
 * otherwise min over proposals of c(R) + sum of opt(reactants), with a
 * per-path depth cap and the same ancestor-cycle exclusion the searchers
 * use. Memoizes only values that were computed without hitting the cap
 * or a cycle, so cached entries are path-independent.
 */

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "retrostar/common.hpp"
#include "retrostar/expansion.hpp"

namespace retrostar {

struct OptimalPlan {
    double cost = kInf;
    std::optional<Route> route;
};

namespace detail {

struct BruteForceState {
    const PlanningInstance* instance;
    std::size_t depth_limit;
    std::map<std::string, std::pair<double, Route>> memo;
    std::set<std::string> path;
};

// Returns {cost, subroute, clean}; clean means no cap/cycle cutoff influenced it.
inline std::tuple<double, Route, bool> brute_force_rec(BruteForceState& st,
                                                       const std::string& m,
                                                       std::size_t depth) {
    if (st.instance->available(m)) return {0.0, Route{}, true};
    if (auto it = st.memo.find(m); it != st.memo.end())
        return {it->second.first, it->second.second, true};
    if (st.path.count(m)) return {kInf, Route{}, false};
    if (depth == 0) return {kInf, Route{}, false};

    st.path.insert(m);
    double best = kInf;
    Route best_route;
    bool clean = true;
    for (const Proposal& p : st.instance->expand(m).proposals) {
        double total = p.cost;
        Route route;
        route.steps.push_back({m, p.reaction, p.cost, p.reactants});
        route.total_cost = p.cost;
        bool feasible = true;
        for (const std::string& reactant : p.reactants) {
            auto [c, sub, sub_clean] = brute_force_rec(st, reactant, depth - 1);
            clean = clean && sub_clean;
            if (c == kInf) {
                feasible = false;
                if (!sub_clean) continue;  // keep scanning for clean flag only
            }
            total += c;
            route.total_cost += c;
            for (RouteStep& s : sub.steps) route.steps.push_back(std::move(s));
        }
        if (feasible && total < best) {
            best = total;
            best_route = std::move(route);
        }
    }
    st.path.erase(m);
    if (clean && best < kInf) st.memo[m] = {best, best_route};
    return {best, std::move(best_route), clean};
}

}  // namespace detail

inline OptimalPlan brute_force_optimal(const PlanningInstance& instance,
                                       std::size_t depth_limit = 32) {
    detail::BruteForceState st{&instance, depth_limit, {}, {}};
    auto [cost, route, clean] = detail::brute_force_rec(st, instance.target, depth_limit);
    (void)clean;
    OptimalPlan plan;
    plan.cost = cost;
    if (cost < kInf) plan.route = std::move(route);
    return plan;
}

/// Validates a route against the expansion model and available set:
/// every step must be a real proposal of its product and every reactant
/// must be either available or produced by a later step.
inline bool validate_route(const PlanningInstance& instance, const Route& route) {
    std::set<std::string> produced;
    for (const RouteStep& s : route.steps) produced.insert(s.product);
    if (!route.steps.empty() && route.steps.front().product != instance.target) return false;
    double cost = 0.0;
    for (const RouteStep& s : route.steps) {
        bool found = false;
        for (const Proposal& p : instance.expand(s.product).proposals) {
            if (p.reaction == s.reaction && p.reactants == s.reactants &&
                std::abs(p.cost - s.cost) <= 1e-12) {
                found = true;
                break;
            }
        }
        if (!found) return false;
        for (const std::string& r : s.reactants)
            if (!instance.available(r) && !produced.count(r)) return false;
        cost += s.cost;
    }
    if (route.steps.empty() && !instance.available(instance.target)) return false;
    return std::abs(cost - route.total_cost) <= 1e-9;
}

}  // namespace retrostar
