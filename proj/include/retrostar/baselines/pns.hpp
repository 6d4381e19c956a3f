#pragma once

/**
 * Proof-number search on the AND-OR tree, plus the DFPN-E variant:
 * depth-first traversal with threshold passing and an additive edge cost
 * on OR-node proof numbers, pn(u) = min over children of h(u,v) + pn(v).
 *
 * Proved nodes have pn = 0, dn = +inf; disproved nodes pn = +inf, dn = 0.
 * AND nodes sum pn and take min dn; OR nodes take min pn (with the edge
 * cost in the E variant) and sum dn.
 */

#include <algorithm>
#include <string>
#include <vector>

#include "retrostar/common.hpp"
#include "retrostar/expansion.hpp"
#include "retrostar/search.hpp"
#include "retrostar/tree.hpp"

namespace retrostar {

enum class PnsVariant { Plain, DfpnE };

struct PnsNode {
    NodeId id = kNoNode;
    NodeKind kind = NodeKind::Or;
    std::string label;
    NodeId parent = kNoNode;
    std::vector<NodeId> children;
    double cost = 0.0;  // AND: reaction cost, also the edge cost h(u,v)
    double pn = 1.0;
    double dn = 1.0;
    bool expanded = false;   // OR
    bool available = false;  // OR
    // Explicit flags: under the E variant pn stays positive above a proven
    // subtree (the edge cost is always added), so pn == 0 is not usable as
    // the proof condition there.
    bool proved = false;
    bool disproved = false;

    bool proven() const { return proved; }
    bool disproven() const { return disproved; }
};

class PnsTree {
public:
    using ValueFn = std::function<double(const std::string&)>;

    PnsTree(const PlanningInstance& instance, PnsVariant variant, const ValueFn* vm,
            const SearchConfig& config)
        : instance_(&instance), variant_(variant), vm_(vm), config_(config) {
        root_ = make_or_node(instance.target, kNoNode);
    }

    NodeId root() const { return root_; }
    const PnsNode& node(NodeId id) const { return nodes_[id]; }
    std::size_t size() const { return nodes_.size(); }
    std::size_t calls_used() const { return calls_used_; }
    bool budget_hit() const { return budget_hit_; }

    /// Eq 2-4 recomputation from current child numbers; pure.
    std::pair<double, double> recompute(NodeId id) const {
        const PnsNode& n = nodes_[id];
        if (n.kind == NodeKind::Or) {
            if (n.available) return {0.0, kInf};
            if (!n.expanded) return {n.pn, n.dn};  // leaf keeps its initialization
            if (n.children.empty()) return {kInf, 0.0};
            double pn = kInf, dn = 0.0;
            for (NodeId c : n.children) {
                double edge = variant_ == PnsVariant::DfpnE ? nodes_[c].cost : 0.0;
                pn = std::min(pn, edge + nodes_[c].pn);
                dn += nodes_[c].dn;
            }
            return {pn, dn};
        }
        double pn = 0.0, dn = kInf;
        for (NodeId c : n.children) {
            pn += nodes_[c].pn;
            dn = std::min(dn, nodes_[c].dn);
        }
        return {pn, dn};
    }

    void run() {
        mid(root_, kInf, kInf, {});
    }

    Route extract_route() const {
        Route route;
        collect(root_, route);
        return route;
    }

private:
    NodeId make_or_node(const std::string& molecule, NodeId parent) {
        PnsNode n;
        n.id = static_cast<NodeId>(nodes_.size());
        n.kind = NodeKind::Or;
        n.label = molecule;
        n.parent = parent;
        if (instance_->available(molecule)) {
            n.available = true;
            n.proved = true;
            n.pn = 0.0;
            n.dn = kInf;
        } else {
            n.pn = vm_ ? 1.0 + (*vm_)(molecule) : 1.0;
            n.dn = 1.0;
        }
        nodes_.push_back(std::move(n));
        return nodes_.back().id;
    }

    void expand_leaf(NodeId id, const std::vector<std::string>& path) {
        if (calls_used_ >= config_.call_limit) {
            budget_hit_ = true;
            return;
        }
        ExpansionResult result = instance_->expand(nodes_[id].label);
        ++calls_used_;
        nodes_[id].expanded = true;
        for (const Proposal& p : result.proposals) {
            if (config_.cycle_filter &&
                std::any_of(p.reactants.begin(), p.reactants.end(),
                            [&](const std::string& r) {
                                return std::find(path.begin(), path.end(), r) != path.end();
                            }))
                continue;
            PnsNode r;
            r.id = static_cast<NodeId>(nodes_.size());
            r.kind = NodeKind::And;
            r.label = p.reaction;
            r.cost = p.cost;
            r.parent = id;
            nodes_.push_back(std::move(r));
            NodeId rid = nodes_.back().id;
            nodes_[id].children.push_back(rid);
            for (const std::string& reactant : p.reactants) {
                NodeId c = make_or_node(reactant, rid);
                nodes_[rid].children.push_back(c);
            }
            auto [pn, dn] = recompute(rid);
            nodes_[rid].pn = pn;
            nodes_[rid].dn = dn;
            refresh_flags(rid);
        }
    }

    void refresh_flags(NodeId id) {
        PnsNode& n = nodes_[id];
        if (n.kind == NodeKind::Or) {
            if (n.available) return;       // proved at creation
            if (!n.expanded) return;       // leaf: undecided
            bool any_proved = false, all_disproved = true;
            for (NodeId c : n.children) {
                if (nodes_[c].proved) any_proved = true;
                if (!nodes_[c].disproved) all_disproved = false;
            }
            n.proved = any_proved;
            n.disproved = all_disproved;  // covers the no-children dead end
        } else {
            bool all_proved = true, any_disproved = false;
            for (NodeId c : n.children) {
                if (!nodes_[c].proved) all_proved = false;
                if (nodes_[c].disproved) any_disproved = true;
            }
            n.proved = all_proved;
            n.disproved = any_disproved;
        }
    }

    void mid(NodeId id, double th_pn, double th_dn, std::vector<std::string> path) {
        PnsNode& n = nodes_[id];
        if (n.kind == NodeKind::Or) {
            if (n.available) return;
            path.push_back(n.label);
            if (!n.expanded) {
                expand_leaf(id, path);
                if (budget_hit_) return;
            }
        }
        while (!budget_hit_) {
            auto [pn, dn] = recompute(id);
            nodes_[id].pn = pn;
            nodes_[id].dn = dn;
            refresh_flags(id);
            if (pn >= th_pn || dn >= th_dn || nodes_[id].proved || nodes_[id].disproved)
                return;

            const PnsNode& cur = nodes_[id];
            NodeId best = kNoNode;
            double best_key = kInf, second_key = kInf;
            for (NodeId c : cur.children) {
                double key;
                if (cur.kind == NodeKind::Or) {
                    double edge = variant_ == PnsVariant::DfpnE ? nodes_[c].cost : 0.0;
                    key = edge + nodes_[c].pn;
                } else {
                    key = nodes_[c].dn;
                }
                if (key < best_key) {
                    second_key = best_key;
                    best_key = key;
                    best = c;
                } else if (key < second_key) {
                    second_key = key;
                }
            }
            double child_th_pn, child_th_dn;
            if (cur.kind == NodeKind::Or) {
                double edge = variant_ == PnsVariant::DfpnE ? nodes_[best].cost : 0.0;
                child_th_pn = std::min(th_pn, second_key + 1.0) - edge;
                child_th_dn = th_dn - cur.dn + nodes_[best].dn;
            } else {
                child_th_pn = th_pn - cur.pn + nodes_[best].pn;
                child_th_dn = std::min(th_dn, second_key + 1.0);
            }
            mid(best, child_th_pn, child_th_dn, path);
        }
    }

    void collect(NodeId id, Route& route) const {
        const PnsNode& n = nodes_[id];
        if (n.kind == NodeKind::Or) {
            if (n.available) return;
            NodeId best = kNoNode;
            for (NodeId c : n.children) {
                if (!nodes_[c].proven()) continue;
                if (best == kNoNode || nodes_[c].cost < nodes_[best].cost) best = c;
            }
            if (best != kNoNode) collect(best, route);
            return;
        }
        RouteStep step;
        step.product = nodes_[n.parent].label;
        step.reaction = n.label;
        step.cost = n.cost;
        for (NodeId c : n.children) step.reactants.push_back(nodes_[c].label);
        route.steps.push_back(std::move(step));
        route.total_cost += n.cost;
        for (NodeId c : n.children) collect(c, route);
    }

    const PlanningInstance* instance_;
    PnsVariant variant_;
    const ValueFn* vm_;
    SearchConfig config_;
    std::vector<PnsNode> nodes_;
    NodeId root_;
    std::size_t calls_used_ = 0;
    bool budget_hit_ = false;
};

inline SearchOutcome dfpn_e_search(const PlanningInstance& instance,
                                   const PnsTree::ValueFn* vm, const SearchConfig& config) {
    SearchOutcome outcome;
    if (instance.available(instance.target)) {
        outcome.status = SearchStatus::Solved;
        outcome.route = Route{};
        outcome.best_root_rn = 0.0;
        return outcome;
    }
    PnsTree tree(instance, PnsVariant::DfpnE, vm, config);
    tree.run();
    outcome.calls_used = tree.calls_used();
    if (tree.node(tree.root()).proven()) {
        outcome.status = SearchStatus::Solved;
        outcome.route = tree.extract_route();
        outcome.best_root_rn = outcome.route->total_cost;
    } else if (tree.node(tree.root()).disproven()) {
        outcome.status = SearchStatus::Exhausted;
    } else {
        outcome.status = SearchStatus::LimitReached;
    }
    return outcome;
}

}  // namespace retrostar
