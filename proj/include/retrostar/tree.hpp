#pragma once

/**
 * AND-OR search tree with reaction-number (rn) and total-cost (V_t)
 * bookkeeping, incremental bottom-up updates and reference recomputation.
 *
 * OR nodes are molecules: solved when any child reaction is solved.
 * AND nodes are reactions: solved when all reactant children are solved.
 *
 * rn(R) = c(R) + sum of child rn;  rn(m) = V_m on the frontier,
 * min over child reactions otherwise, 0 for available leaves and +inf
 * for dead ends.
 *
 * V_t(m) is the estimated total cost of the best plan through m. Sibling
 * molecule nodes share it, so it is cached once on their parent reaction
 * node. After every update the cached values match the from-scratch
 * recomputation (rn_reference / vt_reference), which the tests enforce.
 */

#include <algorithm>
#include <cassert>
#include <functional>
#include <queue>
#include <string>
#include <vector>

#include "retrostar/common.hpp"
#include "retrostar/expansion.hpp"

#include <nlohmann/json.hpp>

namespace retrostar {

enum class NodeKind { Or, And };

struct Node {
    NodeId id = kNoNode;
    NodeKind kind = NodeKind::Or;
    std::string label;  // molecule id for OR, reaction id for AND
    NodeId parent = kNoNode;
    std::vector<NodeId> children;

    double cost = 0.0;         // AND: c(R)
    double rn = 0.0;           // both kinds
    double vt = 0.0;           // AND: V_t shared by all child OR nodes
    double vm_estimate = 0.0;  // OR: cached V_m at creation

    bool is_expanded = false;  // OR
    bool is_available = false; // OR
    bool is_solved = false;
};

class SearchTree {
public:
    using AvailableFn = std::function<bool(const std::string&)>;
    using ValueFn = std::function<double(const std::string&)>;

    SearchTree(const std::string& target, AvailableFn available, ValueFn vm)
        : available_(std::move(available)), vm_(std::move(vm)) {
        root_ = make_or_node(target, kNoNode);
    }

    NodeId root() const { return root_; }
    const Node& node(NodeId id) const { return nodes_[id]; }
    std::size_t size() const { return nodes_.size(); }
    std::size_t expansion_count() const { return expansion_count_; }

    bool in_frontier(NodeId id) const {
        const Node& n = nodes_[id];
        return n.kind == NodeKind::Or && !n.is_expanded && !n.is_available;
    }

    /// Current V_t of an OR node (root carries no accrued cost above it).
    double vt_of(NodeId m) const {
        const Node& n = nodes_[m];
        return n.parent == kNoNode ? n.rn : nodes_[n.parent].vt;
    }

    /// Grow an AND-OR stump under frontier node m. Values are not updated
    /// here; call update() with the same result afterwards.
    std::vector<NodeId> expand(NodeId m, const ExpansionResult& result) {
        if (nodes_[m].is_expanded) throw ExpandOnExpandedNode();
        if (nodes_[m].is_available) throw ExpandOnAvailable();
        std::vector<NodeId> created;
        nodes_[m].is_expanded = true;
        for (const Proposal& p : result.proposals) {
            NodeId r = make_and_node(p, m);
            nodes_[m].children.push_back(r);
            created.push_back(r);
            for (const std::string& reactant : p.reactants) {
                NodeId c = make_or_node(reactant, r);
                nodes_[r].children.push_back(c);
                created.push_back(c);
            }
        }
        ++expansion_count_;
        return created;
    }

    /// Incremental value update after expand() at m (Update/UpdateSibling).
    /// New reaction children get rn and V_t, the rn delta propagates up the
    /// ancestor path stopping as soon as it vanishes, and sibling subtrees
    /// hanging off the path receive the same delta on their V_t caches.
    void update(NodeId m, const ExpansionResult& /*result*/) {
        Node& nm = nodes_[m];
        const double old_rn = nm.rn;
        const double old_vt = vt_of(m);

        for (NodeId r : nm.children) {
            Node& rnode = nodes_[r];
            double sum = rnode.cost;
            bool all_solved = true;
            for (NodeId c : rnode.children) {
                sum += nodes_[c].rn;
                all_solved = all_solved && nodes_[c].is_solved;
            }
            rnode.rn = sum;
            rnode.vt = old_vt - old_rn + rnode.rn;
            rnode.is_solved = all_solved;
            push_frontier_children(r);
        }

        double new_rn = kInf;
        bool any_solved = false;
        for (NodeId r : nm.children) {
            new_rn = std::min(new_rn, nodes_[r].rn);
            any_solved = any_solved || nodes_[r].is_solved;
        }
        nm.rn = new_rn;
        nm.is_solved = any_solved;
        if (any_solved) propagate_solved(m);

        double delta = finite_delta(new_rn, old_rn);
        NodeId current = m;
        while (delta != 0.0 && nodes_[current].parent != kNoNode) {
            on_visit(current);
            NodeId r = nodes_[current].parent;
            Node& rnode = nodes_[r];
            on_visit(r);
            rnode.rn += delta;
            rnode.vt += delta;
            push_frontier_children(r);
            for (NodeId sib : rnode.children)
                if (sib != current) update_sibling(sib, delta);

            NodeId up = rnode.parent;
            Node& unode = nodes_[up];
            double up_rn = kInf;
            for (NodeId c : unode.children) up_rn = std::min(up_rn, nodes_[c].rn);
            delta = finite_delta(up_rn, unode.rn);
            unode.rn = up_rn;
            current = up;
        }
        if (nodes_[m].parent == kNoNode || nodes_[current].parent == kNoNode)
            on_visit(current);
    }

    /// Pop the frontier node with minimal V_t (ties by lowest id).
    NodeId select_next() {
        prune_stale();
        if (frontier_.empty()) throw EmptyFrontier();
        NodeId id = frontier_.top().id;
        frontier_.pop();
        return id;
    }

    bool frontier_empty() {
        prune_stale();
        return frontier_.empty();
    }

    /// Minimal V_t over the frontier, +inf when empty.
    double frontier_min_vt() {
        prune_stale();
        return frontier_.empty() ? kInf : frontier_.top().key;
    }

    /// Pure recursive evaluation of rn ignoring caches; test oracle.
    double rn_reference(NodeId id) const {
        const Node& n = nodes_[id];
        if (n.kind == NodeKind::And) {
            double sum = n.cost;
            for (NodeId c : n.children) sum += rn_reference(c);
            return sum;
        }
        if (n.is_available) return 0.0;
        if (!n.is_expanded) return n.vm_estimate;
        double best = kInf;
        for (NodeId c : n.children) best = std::min(best, rn_reference(c));
        return best;
    }

    /// Pure recomputation of V_t for an OR node; test oracle. Sums the
    /// reaction costs along the path to the root plus the rn of every
    /// off-path molecule hanging off those reactions, plus rn(m) itself.
    double vt_reference(NodeId m) const {
        const Node& n = nodes_[m];
        if (n.parent == kNoNode) return rn_reference(m);
        NodeId r = n.parent;
        const Node& rnode = nodes_[r];
        NodeId up = rnode.parent;
        double excess = finite_delta(vt_reference(up), rn_reference(up));
        double sum = rnode.cost;
        for (NodeId c : rnode.children) sum += rn_reference(c);
        return excess + sum;
    }

    /// Follow minimal-rn solved reactions from the root down to available
    /// leaves. Ties break towards the lowest node id (creation order).
    Route extract_best_route() const {
        if (!nodes_[root_].is_solved) throw NoRouteFound();
        Route route;
        collect_route(root_, route);
        return route;
    }

    /// Molecule labels on the OR path from the root down to m, inclusive.
    std::vector<std::string> ancestor_molecules(NodeId m) const {
        std::vector<std::string> out;
        for (NodeId cur = m; cur != kNoNode;) {
            const Node& n = nodes_[cur];
            if (n.kind == NodeKind::Or) out.push_back(n.label);
            cur = n.parent;
        }
        return out;
    }

    nlohmann::json snapshot() const {
        nlohmann::json nodes = nlohmann::json::array();
        nlohmann::json edges = nlohmann::json::array();
        for (const Node& n : nodes_) {
            nlohmann::json j{{"id", n.id},
                             {"kind", n.kind == NodeKind::Or ? "or" : "and"},
                             {"label", n.label},
                             {"rn", n.rn},
                             {"solved", n.is_solved}};
            if (n.kind == NodeKind::Or) {
                j["expanded"] = n.is_expanded;
                j["available"] = n.is_available;
                j["vt"] = vt_of(n.id);
            } else {
                j["cost"] = n.cost;
                j["vt"] = n.vt;
            }
            nodes.push_back(std::move(j));
            for (NodeId c : n.children) edges.push_back({{"from", n.id}, {"to", c}});
        }
        return {{"root", root_}, {"nodes", nodes}, {"edges", edges}};
    }

    /// Test hook: invoked for every node touched by update().
    std::function<void(NodeId)> visit_hook;

private:
    struct FrontierEntry {
        double key;
        NodeId id;
        bool operator>(const FrontierEntry& o) const {
            return key > o.key || (key == o.key && id > o.id);
        }
    };

    NodeId make_or_node(const std::string& molecule, NodeId parent) {
        Node n;
        n.id = static_cast<NodeId>(nodes_.size());
        n.kind = NodeKind::Or;
        n.label = molecule;
        n.parent = parent;
        if (available_(molecule)) {
            n.is_available = true;
            n.is_solved = true;
            n.rn = 0.0;
        } else {
            n.vm_estimate = vm_(molecule);
            n.rn = n.vm_estimate;
        }
        nodes_.push_back(std::move(n));
        NodeId id = nodes_.back().id;
        if (in_frontier(id) && parent == kNoNode)
            frontier_.push({nodes_[id].rn, id});
        return id;
    }

    NodeId make_and_node(const Proposal& p, NodeId parent) {
        Node n;
        n.id = static_cast<NodeId>(nodes_.size());
        n.kind = NodeKind::And;
        n.label = p.reaction;
        n.cost = p.cost;
        n.parent = parent;
        nodes_.push_back(std::move(n));
        return nodes_.back().id;
    }

    // Re-key every frontier child of reaction r after its V_t changed.
    void push_frontier_children(NodeId r) {
        for (NodeId c : nodes_[r].children)
            if (in_frontier(c)) frontier_.push({nodes_[r].vt, c});
    }

    void update_sibling(NodeId m, double delta) {
        on_visit(m);
        for (NodeId r : nodes_[m].children) {
            on_visit(r);
            nodes_[r].vt += delta;
            push_frontier_children(r);
            for (NodeId c : nodes_[r].children) update_sibling(c, delta);
        }
    }

    void propagate_solved(NodeId m) {
        NodeId cur = m;
        while (nodes_[cur].parent != kNoNode) {
            NodeId r = nodes_[cur].parent;
            bool all = true;
            for (NodeId c : nodes_[r].children) all = all && nodes_[c].is_solved;
            if (nodes_[r].is_solved == all) return;
            nodes_[r].is_solved = all;
            NodeId up = nodes_[r].parent;
            bool any = false;
            for (NodeId c : nodes_[up].children) any = any || nodes_[c].is_solved;
            if (nodes_[up].is_solved == any) return;
            nodes_[up].is_solved = any;
            cur = up;
        }
    }

    void collect_route(NodeId m, Route& route) const {
        const Node& n = nodes_[m];
        if (n.is_available) return;
        NodeId best = kNoNode;
        for (NodeId r : n.children) {
            if (!nodes_[r].is_solved) continue;
            if (best == kNoNode || nodes_[r].rn < nodes_[best].rn) best = r;
        }
        assert(best != kNoNode);
        const Node& rnode = nodes_[best];
        RouteStep step;
        step.product = n.label;
        step.reaction = rnode.label;
        step.cost = rnode.cost;
        for (NodeId c : rnode.children) step.reactants.push_back(nodes_[c].label);
        route.steps.push_back(std::move(step));
        route.total_cost += rnode.cost;
        for (NodeId c : rnode.children) collect_route(c, route);
    }

    void prune_stale() {
        while (!frontier_.empty()) {
            const FrontierEntry& top = frontier_.top();
            if (in_frontier(top.id) && top.key == vt_of(top.id)) return;
            frontier_.pop();
        }
    }

    void on_visit(NodeId id) {
        if (visit_hook) visit_hook(id);
    }

    std::vector<Node> nodes_;
    NodeId root_;
    AvailableFn available_;
    ValueFn vm_;
    std::priority_queue<FrontierEntry, std::vector<FrontierEntry>, std::greater<>> frontier_;
    std::size_t expansion_count_ = 0;
};

}  // namespace retrostar
