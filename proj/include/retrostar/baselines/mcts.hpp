#pragma once

/**
 * MCTS with PUCT for planning over molecule-set states. A node holds the
 * set of unresolved molecules; a move picks one molecule and one of its
 * proposals, replacing it by the non-available reactants. Priors come
 * from proposal costs via p = exp(-cost), renormalized per node.
 *
 * Leaf evaluation uses the value oracle when supplied (reward
 * exp(-sum V_m) over the state) or a bounded random rollout otherwise.
 * Terminal states (empty set) have reward 1 and yield a route.
 */

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "retrostar/common.hpp"
#include "retrostar/expansion.hpp"
#include "retrostar/search.hpp"

namespace retrostar {

struct MctsConfig : SearchConfig {
    double puct_c = 1.5;
    std::size_t rollout_depth = 20;
    std::uint64_t rng_seed = 0;
};

namespace detail {

struct MctsNode {
    std::vector<std::string> state;  // sorted unresolved molecules
    std::size_t visits = 0;
    double value_sum = 0.0;
    bool expanded = false;
    bool terminal = false;

    struct Edge {
        std::string molecule;
        Proposal proposal;
        double prior = 0.0;
        std::unique_ptr<MctsNode> child;
    };
    std::vector<Edge> edges;

    double mean_value() const { return visits == 0 ? 0.0 : value_sum / visits; }
};

class MctsSearcher {
public:
    MctsSearcher(const PlanningInstance& instance, const SearchTree::ValueFn* vm,
                 const MctsConfig& config)
        : instance_(&instance), vm_(vm), config_(config), rng_(config.rng_seed) {}

    SearchOutcome run() {
        SearchOutcome outcome;
        if (instance_->available(instance_->target)) {
            outcome.status = SearchStatus::Solved;
            outcome.route = Route{};
            outcome.best_root_rn = 0.0;
            return outcome;
        }
        MctsNode root;
        root.state = {instance_->target};

        // Simulation cap guards against saturated trees where every model
        // result is already cached and no terminal state is reachable.
        const std::size_t max_simulations = (config_.call_limit + 1) * 100;
        for (std::size_t sim = 0; sim < max_simulations && !budget_hit_ && !solved_; ++sim) {
            std::vector<MctsNode*> trail{&root};
            std::vector<const MctsNode::Edge*> moves;
            simulate(root, trail, moves);
        }
        outcome.calls_used = calls_used_;
        if (solved_) {
            outcome.status = SearchStatus::Solved;
            outcome.route = solution_;
            outcome.best_root_rn = solution_.total_cost;
        } else {
            outcome.status = SearchStatus::LimitReached;
        }
        return outcome;
    }

private:
    const ExpansionResult* expand_model(const std::string& m) {
        if (auto it = cache_.find(m); it != cache_.end()) return &it->second;
        if (calls_used_ >= config_.call_limit) {
            budget_hit_ = true;
            return nullptr;
        }
        ++calls_used_;
        return &cache_.emplace(m, instance_->expand(m)).first->second;
    }

    void expand_node(MctsNode& node) {
        node.expanded = true;
        double prior_sum = 0.0;
        for (const std::string& m : node.state) {
            const ExpansionResult* result = expand_model(m);
            if (!result) return;
            for (const Proposal& p : result->proposals) {
                MctsNode::Edge e;
                e.molecule = m;
                e.proposal = p;
                e.prior = std::exp(-p.cost);
                prior_sum += e.prior;
                node.edges.push_back(std::move(e));
            }
        }
        for (auto& e : node.edges) e.prior /= prior_sum > 0.0 ? prior_sum : 1.0;
    }

    std::vector<std::string> apply_move(const std::vector<std::string>& state,
                                        const MctsNode::Edge& e) const {
        std::vector<std::string> next;
        for (const std::string& m : state)
            if (m != e.molecule) next.push_back(m);
        for (const std::string& r : e.proposal.reactants)
            if (!instance_->available(r) &&
                std::find(next.begin(), next.end(), r) == next.end())
                next.push_back(r);
        std::sort(next.begin(), next.end());
        return next;
    }

    double evaluate(const MctsNode& node) {
        if (vm_) {
            double sum = 0.0;
            for (const std::string& m : node.state) sum += (*vm_)(m);
            return std::exp(-sum);
        }
        return rollout(node.state);
    }

    double rollout(std::vector<std::string> state) {
        for (std::size_t step = 0; step < config_.rollout_depth; ++step) {
            if (state.empty()) return 1.0;
            std::uniform_int_distribution<std::size_t> pick(0, state.size() - 1);
            std::string m = state[pick(rng_)];
            const ExpansionResult* result = expand_model(m);
            if (!result) return 0.0;
            if (result->proposals.empty()) return 0.0;
            std::vector<double> weights;
            for (const Proposal& p : result->proposals) weights.push_back(std::exp(-p.cost));
            std::discrete_distribution<std::size_t> choose(weights.begin(), weights.end());
            const Proposal& p = result->proposals[choose(rng_)];
            state.erase(std::find(state.begin(), state.end(), m));
            for (const std::string& r : p.reactants)
                if (!instance_->available(r) &&
                    std::find(state.begin(), state.end(), r) == state.end())
                    state.push_back(r);
        }
        return state.empty() ? 1.0 : 0.0;
    }

    void simulate(MctsNode& node, std::vector<MctsNode*>& trail,
                  std::vector<const MctsNode::Edge*>& moves) {
        if (node.state.empty()) {
            node.terminal = true;
            record_solution(moves);
            backup(trail, 1.0);
            return;
        }
        if (!node.expanded) {
            expand_node(node);
            if (budget_hit_) return;
            double value = evaluate(node);
            if (budget_hit_) return;
            backup(trail, value);
            return;
        }
        if (node.edges.empty()) {  // dead end
            backup(trail, 0.0);
            return;
        }
        MctsNode::Edge* best = nullptr;
        double best_score = -kInf;
        const double sqrt_n = std::sqrt(static_cast<double>(node.visits) + 1.0);
        for (auto& e : node.edges) {
            double q = e.child ? e.child->mean_value() : 0.0;
            std::size_t nv = e.child ? e.child->visits : 0;
            double score = q + config_.puct_c * e.prior * sqrt_n / (1.0 + nv);
            if (score > best_score) {
                best_score = score;
                best = &e;
            }
        }
        if (!best->child) {
            best->child = std::make_unique<MctsNode>();
            best->child->state = apply_move(node.state, *best);
        }
        trail.push_back(best->child.get());
        moves.push_back(best);
        simulate(*best->child, trail, moves);
    }

    void record_solution(const std::vector<const MctsNode::Edge*>& moves) {
        solved_ = true;
        solution_ = Route{};
        for (const MctsNode::Edge* e : moves) {
            solution_.steps.push_back({e->molecule, e->proposal.reaction, e->proposal.cost,
                                       e->proposal.reactants});
            solution_.total_cost += e->proposal.cost;
        }
    }

    void backup(const std::vector<MctsNode*>& trail, double value) {
        for (MctsNode* n : trail) {
            ++n->visits;
            n->value_sum += value;
        }
    }

    const PlanningInstance* instance_;
    const SearchTree::ValueFn* vm_;
    MctsConfig config_;
    std::mt19937_64 rng_;
    std::map<std::string, ExpansionResult> cache_;
    std::size_t calls_used_ = 0;
    bool budget_hit_ = false;
    bool solved_ = false;
    Route solution_;
};

}  // namespace detail

inline SearchOutcome mcts_search(const PlanningInstance& instance,
                                 const SearchTree::ValueFn* vm, const MctsConfig& config) {
    return detail::MctsSearcher(instance, vm, config).run();
}

}  // namespace retrostar
