#pragma once

/**
 * Benchmark harness: run an algorithm x instance x budget grid, emit a
 * schema-stable CSV (rows ordered by algorithm, instance, budget) and
 * aggregate success rates, call counts, best-route tallies and
 * approximation ratios.
 */

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "retrostar/baselines/greedy.hpp"
#include "retrostar/baselines/mcts.hpp"
#include "retrostar/baselines/pns.hpp"
#include "retrostar/common.hpp"
#include "retrostar/expansion.hpp"
#include "retrostar/search.hpp"

namespace retrostar {

inline const std::vector<std::string> kKnownAlgorithms = {
    "retrostar", "retrostar0", "dfpn_e", "dfpn_e_plus", "mcts", "mcts_plus", "greedy"};

struct NamedInstance {
    std::string id;
    PlanningInstance instance;
};

struct BenchmarkRow {
    std::string algorithm;
    std::string instance_id;
    std::size_t budget = 0;
    SearchStatus status = SearchStatus::Exhausted;
    std::size_t calls_used = 0;
    std::optional<double> route_cost;
    std::optional<std::size_t> route_length;
    std::optional<double> optimal_cost;

    std::optional<double> approximation_ratio() const {
        if (!route_cost || !optimal_cost || *optimal_cost <= 0.0) return std::nullopt;
        return *route_cost / *optimal_cost;
    }
};

struct BenchmarkConfig {
    std::vector<std::string> algorithms;
    std::vector<std::size_t> call_limits;
    HaltMode halt_mode = HaltMode::FirstSolution;
    bool cycle_filter = true;
    double puct_c = 1.5;
    std::size_t rollout_depth = 20;
    std::uint64_t rng_seed = 0;
};

inline SearchOutcome run_algorithm(const std::string& algo, const PlanningInstance& instance,
                                   const SearchTree::ValueFn& vm, std::size_t budget,
                                   const BenchmarkConfig& config,
                                   std::uint64_t instance_seed) {
    SearchConfig sc;
    sc.call_limit = budget;
    sc.halt_mode = config.halt_mode;
    sc.cycle_filter = config.cycle_filter;
    if (algo == "retrostar") return run_search(instance, vm, sc);
    if (algo == "retrostar0")
        return run_search(instance, [](const std::string&) { return 0.0; }, sc);
    if (algo == "dfpn_e") return dfpn_e_search(instance, nullptr, sc);
    if (algo == "dfpn_e_plus") return dfpn_e_search(instance, &vm, sc);
    if (algo == "greedy") return greedy_dfs(instance, sc);
    if (algo == "mcts" || algo == "mcts_plus") {
        MctsConfig mc;
        static_cast<SearchConfig&>(mc) = sc;
        mc.puct_c = config.puct_c;
        mc.rollout_depth = config.rollout_depth;
        mc.rng_seed = config.rng_seed ^ instance_seed;
        return mcts_search(instance, algo == "mcts_plus" ? &vm : nullptr, mc);
    }
    throw SearchError("unknown algorithm: " + algo);
}

inline std::vector<BenchmarkRow> run_benchmark(const std::vector<NamedInstance>& instances,
                                               const SearchTree::ValueFn& vm,
                                               const BenchmarkConfig& config) {
    if (config.algorithms.empty() || config.call_limits.empty())
        throw SearchError("benchmark needs at least one algorithm and one budget");
    std::vector<BenchmarkRow> rows;
    for (const std::string& algo : config.algorithms) {
        std::uint64_t instance_seed = 0;
        for (const NamedInstance& ni : instances) {
            ++instance_seed;
            for (std::size_t budget : config.call_limits) {
                BenchmarkRow row;
                row.algorithm = algo;
                row.instance_id = ni.id;
                row.budget = budget;
                row.optimal_cost = ni.instance.optimal_cost;
                try {
                    SearchOutcome out =
                        run_algorithm(algo, ni.instance, vm, budget, config, instance_seed);
                    row.status = out.status;
                    row.calls_used = out.calls_used;
                    if (out.route) {
                        row.route_cost = out.route->total_cost;
                        row.route_length = out.route->length();
                    }
                } catch (const SearchError&) {
                    row.status = SearchStatus::Exhausted;  // recorded as failed, run continues
                }
                rows.push_back(std::move(row));
            }
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const BenchmarkRow& a, const BenchmarkRow& b) {
        if (a.algorithm != b.algorithm) return a.algorithm < b.algorithm;
        if (a.instance_id != b.instance_id) return a.instance_id < b.instance_id;
        return a.budget < b.budget;
    });
    return rows;
}

namespace detail {
inline std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}
}  // namespace detail

inline const char* status_name(SearchStatus s) {
    switch (s) {
        case SearchStatus::Solved: return "solved";
        case SearchStatus::Exhausted: return "exhausted";
        case SearchStatus::LimitReached: return "limit";
    }
    return "unknown";
}

inline void write_csv(const std::vector<BenchmarkRow>& rows, std::ostream& out) {
    out << "algorithm,instance,budget,status,calls_used,route_cost,route_length,"
           "optimal_cost,approximation_ratio\n";
    for (const BenchmarkRow& r : rows) {
        out << r.algorithm << ',' << r.instance_id << ',' << r.budget << ','
            << status_name(r.status) << ',' << r.calls_used << ',';
        if (r.route_cost) out << detail::fmt_double(*r.route_cost);
        out << ',';
        if (r.route_length) out << *r.route_length;
        out << ',';
        if (r.optimal_cost) out << detail::fmt_double(*r.optimal_cost);
        out << ',';
        if (auto ar = r.approximation_ratio()) out << detail::fmt_double(*ar);
        out << '\n';
    }
}

struct AlgorithmSummary {
    std::map<std::size_t, double> success_rate;  // per budget
    double mean_calls = 0.0;
    std::size_t best_cost_count = 0;    // instances where it tied the best cost
    std::size_t best_length_count = 0;  // instances where it tied the best length
    double avg_ar = 0.0;
    double max_ar = 0.0;
    std::size_t ar_count = 0;
};

/// Aggregates per algorithm. Best-route tallies use each algorithm's result
/// at the largest budget; cost ties within 1e-9 all count as best.
inline std::map<std::string, AlgorithmSummary> summarize(const std::vector<BenchmarkRow>& rows) {
    std::map<std::string, AlgorithmSummary> out;
    std::map<std::size_t, std::map<std::string, std::size_t>> solved_count, total_count;
    std::map<std::string, std::pair<double, std::size_t>> calls;
    std::size_t max_budget = 0;
    for (const BenchmarkRow& r : rows) max_budget = std::max(max_budget, r.budget);

    std::map<std::string, std::map<std::string, BenchmarkRow const*>> at_max;  // instance -> algo
    for (const BenchmarkRow& r : rows) {
        total_count[r.budget][r.algorithm]++;
        if (r.status == SearchStatus::Solved) solved_count[r.budget][r.algorithm]++;
        calls[r.algorithm].first += static_cast<double>(r.calls_used);
        calls[r.algorithm].second++;
        if (r.budget == max_budget) {
            at_max[r.instance_id][r.algorithm] = &r;
            if (auto ar = r.approximation_ratio()) {
                auto& s = out[r.algorithm];
                s.avg_ar += *ar;
                s.max_ar = std::max(s.max_ar, *ar);
                s.ar_count++;
            }
        }
    }
    for (auto& [budget, per_algo] : total_count)
        for (auto& [algo, total] : per_algo)
            out[algo].success_rate[budget] =
                static_cast<double>(solved_count[budget][algo]) / static_cast<double>(total);
    for (auto& [algo, c] : calls)
        out[algo].mean_calls = c.first / static_cast<double>(c.second);
    for (auto& [algo, s] : out)
        if (s.ar_count > 0) s.avg_ar /= static_cast<double>(s.ar_count);

    for (auto& [instance, per_algo] : at_max) {
        double best_cost = kInf;
        std::size_t best_len = static_cast<std::size_t>(-1);
        for (auto& [algo, row] : per_algo) {
            if (row->route_cost) best_cost = std::min(best_cost, *row->route_cost);
            if (row->route_length) best_len = std::min(best_len, *row->route_length);
        }
        for (auto& [algo, row] : per_algo) {
            if (row->route_cost && *row->route_cost <= best_cost + 1e-9)
                out[algo].best_cost_count++;
            if (row->route_length && *row->route_length == best_len)
                out[algo].best_length_count++;
        }
    }
    return out;
}

struct RouteComparison {
    std::size_t shorter = 0;   // strictly shorter than the reference route
    std::size_t better = 0;    // strictly lower cost than the reference route
    std::size_t unsolved = 0;  // algorithm unsolved where a reference exists
};

struct RouteReference {
    double cost = 0.0;
    std::size_t length = 0;
};

/// Per-algorithm tallies against reference (expert) routes at the largest budget.
inline std::map<std::string, RouteComparison> compare_routes(
    const std::vector<BenchmarkRow>& rows,
    const std::map<std::string, RouteReference>& reference) {
    if (reference.empty()) throw MissingReference();
    std::size_t max_budget = 0;
    for (const BenchmarkRow& r : rows) max_budget = std::max(max_budget, r.budget);
    std::map<std::string, RouteComparison> out;
    for (const BenchmarkRow& r : rows) {
        if (r.budget != max_budget) continue;
        auto it = reference.find(r.instance_id);
        if (it == reference.end()) continue;
        RouteComparison& c = out[r.algorithm];
        if (r.status != SearchStatus::Solved) {
            c.unsolved++;
            continue;
        }
        if (r.route_length && *r.route_length < it->second.length) c.shorter++;
        if (r.route_cost && *r.route_cost < it->second.cost - 1e-9) c.better++;
    }
    return out;
}

}  // namespace retrostar
