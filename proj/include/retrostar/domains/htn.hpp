#pragma once

/**
 * Synthetic hierarchical-task-planning instance generator. Tasks play the
 * role of molecules, methods the role of reactions, primitive tasks are
 * the available set. Every generated instance is a finite acyclic tree
 * of fresh task ids, so it is always solvable; the ground-truth optimal
 * cost is computed on generation and stored in the instance metadata.
 */

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <utility>

#include "retrostar/common.hpp"
#include "retrostar/domains/brute_force.hpp"
#include "retrostar/domains/cache.hpp"
#include "retrostar/expansion.hpp"

namespace retrostar {

struct HtnParams {
    std::uint64_t rng_seed = 0;
    std::size_t depth = 5;                       // max decomposition depth
    std::pair<int, int> or_branch = {2, 3};      // methods per task
    std::pair<int, int> and_branch = {1, 3};     // subtasks per method
    double primitive_prob = 0.35;
    // Chance that a task gets an extra "detour" method. The detour is priced
    // just above the task's most expensive real method, so cost-guided search
    // rarely looks at it — but it has a single open subtask (a long chain of
    // near-free one-subtask methods that eventually dead-ends), which makes
    // it attractive to searchers that count open subgoals instead of cost.
    double trap_prob = 0.0;
    std::pair<int, int> trap_length = {15, 25};
    std::pair<double, double> trap_entry_margin = {0.05, 0.3};
    std::pair<double, double> trap_cost_range = {0.02, 0.08};
    std::pair<double, double> cost_range = {0.1, 2.0};
    // Draw method costs log-uniformly over cost_range instead of uniformly.
    // Mimics negative-log-likelihood costs: mostly cheap with a heavy tail,
    // so competing routes rarely tie.
    bool log_uniform_costs = false;
};

struct HtnInstance {
    PlanningInstance instance;
    std::shared_ptr<ExpansionCache> cache;
    std::shared_ptr<std::set<std::string>> primitives;
    std::string target;
};

namespace detail {

class HtnBuilder {
public:
    HtnBuilder(const HtnParams& params)
        : params_(params),
          rng_(params.rng_seed),
          cache_(std::make_shared<ExpansionCache>()),
          primitives_(std::make_shared<std::set<std::string>>()) {}

    std::string build_task(std::size_t depth) {
        std::string id = "task_" + std::to_string(task_count_++);
        std::uniform_int_distribution<int> or_dist(params_.or_branch.first,
                                                   params_.or_branch.second);
        std::uniform_int_distribution<int> and_dist(params_.and_branch.first,
                                                    params_.and_branch.second);
        std::uniform_real_distribution<double> coin(0.0, 1.0);

        ExpansionResult methods;
        const int n_methods = or_dist(rng_);
        for (int i = 0; i < n_methods; ++i) {
            Proposal method;
            method.reaction = "method_" + std::to_string(method_count_++);
            method.cost = draw_cost();
            const int n_subtasks = and_dist(rng_);
            for (int j = 0; j < n_subtasks; ++j) {
                bool primitive = depth + 1 >= params_.depth || coin(rng_) < params_.primitive_prob;
                method.reactants.push_back(primitive ? make_primitive()
                                                     : build_task(depth + 1));
            }
            methods.proposals.push_back(std::move(method));
        }
        // Never on the root: a detour there would let depth-first provers
        // finish through it in one cheap chain.
        if (depth > 0 && coin(rng_) < params_.trap_prob) {
            std::uniform_real_distribution<double> margin(params_.trap_entry_margin.first,
                                                          params_.trap_entry_margin.second);
            double dearest = 0.0;
            for (const Proposal& m : methods.proposals) dearest = std::max(dearest, m.cost);
            Proposal detour;
            detour.reaction = "method_" + std::to_string(method_count_++);
            detour.cost = dearest + margin(rng_);
            detour.reactants.push_back(make_trap_chain());
            methods.proposals.push_back(std::move(detour));
        }
        cache_->add(id, std::move(methods));
        return id;
    }

    double draw_cost() {
        if (params_.log_uniform_costs) {
            std::uniform_real_distribution<double> log_dist(std::log(params_.cost_range.first),
                                                            std::log(params_.cost_range.second));
            return std::exp(log_dist(rng_));
        }
        std::uniform_real_distribution<double> dist(params_.cost_range.first,
                                                    params_.cost_range.second);
        return dist(rng_);
    }

    std::string make_trap_chain() {
        std::uniform_int_distribution<int> len_dist(params_.trap_length.first,
                                                    params_.trap_length.second);
        std::uniform_real_distribution<double> cost_dist(params_.trap_cost_range.first,
                                                         params_.trap_cost_range.second);
        const int len = len_dist(rng_);
        std::string below = "task_" + std::to_string(task_count_++);
        cache_->add(below, ExpansionResult{});  // the dead bottom
        for (int i = 0; i < len; ++i) {
            std::string id = "task_" + std::to_string(task_count_++);
            ExpansionResult methods;
            Proposal m;
            m.reaction = "method_" + std::to_string(method_count_++);
            m.cost = cost_dist(rng_);
            m.reactants.push_back(below);
            methods.proposals.push_back(std::move(m));
            cache_->add(id, std::move(methods));
            below = id;
        }
        return below;
    }

    std::string make_primitive() {
        std::string id = "prim_" + std::to_string(primitive_count_++);
        primitives_->insert(id);
        return id;
    }

    std::shared_ptr<ExpansionCache> cache_;
    std::shared_ptr<std::set<std::string>> primitives_;

private:
    HtnParams params_;
    std::mt19937_64 rng_;
    std::size_t task_count_ = 0;
    std::size_t method_count_ = 0;
    std::size_t primitive_count_ = 0;
};

}  // namespace detail

inline HtnInstance generate_htn(const HtnParams& params) {
    detail::HtnBuilder builder(params);
    std::string target = builder.build_task(0);

    HtnInstance out;
    out.cache = builder.cache_;
    out.primitives = builder.primitives_;
    out.target = target;
    out.instance = make_cached_instance(out.cache, out.primitives, target);
    const std::size_t depth_cap =
        params.depth + static_cast<std::size_t>(std::max(params.trap_length.second, 0)) + 2;
    out.instance.optimal_cost = brute_force_optimal(out.instance, depth_cap).cost;
    return out;
}

}  // namespace retrostar
