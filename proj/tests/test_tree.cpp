#include "doctest.h"

#include <cmath>
#include <set>

#include <retrostar/domains/brute_force.hpp>
#include <retrostar/search.hpp>
#include <retrostar/tree.hpp>

#include "test_util.hpp"

using namespace retrostar;
using rs_test::TestDomain;

namespace {

SearchTree::ValueFn zero_vm() {
    return [](const std::string&) { return 0.0; };
}

bool close(double a, double b, double tol = 1e-9) {
    if (a == b) return true;  // covers matching infinities
    return std::abs(a - b) <= tol;
}

void check_caches_match_reference(const SearchTree& tree) {
    for (NodeId id = 0; id < tree.size(); ++id) {
        const Node& n = tree.node(id);
        CHECK(close(n.rn, tree.rn_reference(id)));
        if (n.kind == NodeKind::Or) CHECK(close(tree.vt_of(id), tree.vt_reference(id)));
    }
}

}  // namespace

TEST_CASE("new_tree frontier root") {
    SearchTree tree("t", [](const std::string&) { return false; },
                    [](const std::string&) { return 2.5; });
    CHECK(tree.node(tree.root()).rn == 2.5);
    CHECK(tree.in_frontier(tree.root()));
    CHECK_FALSE(tree.node(tree.root()).is_solved);
}

TEST_CASE("new_tree available target") {
    SearchTree tree("t", [](const std::string&) { return true; },
                    [](const std::string&) { return 7.0; });
    CHECK(tree.node(tree.root()).rn == 0.0);
    CHECK(tree.node(tree.root()).is_solved);
    CHECK(tree.frontier_empty());
}

TEST_CASE("new_tree zero oracle lowerbound") {
    SearchTree tree("t", [](const std::string&) { return false; }, zero_vm());
    CHECK(tree.node(tree.root()).rn == 0.0);
    CHECK(tree.vt_of(tree.root()) == 0.0);
}

TEST_CASE("expand structural counts and errors") {
    auto d = rs_test::two_route_domain();
    SearchTree tree("t", [&](const std::string& m) { return d.blocks->count(m) > 0; },
                    zero_vm());
    auto result = d.cache->expand("t");
    auto created = tree.expand(tree.root(), result);
    CHECK(created.size() == 5);  // 2 AND + 3 OR
    CHECK(tree.size() == 6);
    CHECK_THROWS_AS(tree.expand(tree.root(), result), ExpandOnExpandedNode);
}

TEST_CASE("expand on available node throws") {
    SearchTree tree("t", [](const std::string&) { return false; }, zero_vm());
    ExpansionResult r;
    r.proposals.push_back({"R", 1.0, {"a"}});
    tree.expand(tree.root(), r);
    tree.update(tree.root(), r);
    // "a" is not available here, but building one that is:
    SearchTree tree2("t", [](const std::string& m) { return m == "a"; }, zero_vm());
    ExpansionResult r2;
    r2.proposals.push_back({"R", 1.0, {"a"}});
    tree2.expand(tree2.root(), r2);
    tree2.update(tree2.root(), r2);
    for (NodeId id = 0; id < tree2.size(); ++id) {
        if (tree2.node(id).kind == NodeKind::Or && tree2.node(id).is_available)
            CHECK_THROWS_AS(tree2.expand(id, r2), ExpandOnAvailable);
    }
}

TEST_CASE("update on two-route instance") {
    // Derived by enumeration: routes {R1} cost 1 and {R2} cost 2.
    auto d = rs_test::two_route_domain();
    SearchTree tree("t", [&](const std::string& m) { return d.blocks->count(m) > 0; },
                    zero_vm());
    auto result = d.cache->expand("t");
    tree.expand(tree.root(), result);
    tree.update(tree.root(), result);

    const Node& root = tree.node(tree.root());
    CHECK(root.rn == doctest::Approx(1.0));
    CHECK(root.is_solved);
    // AND children: R1 rn=1, R2 rn=2.
    CHECK(tree.node(root.children[0]).rn == doctest::Approx(1.0));
    CHECK(tree.node(root.children[1]).rn == doctest::Approx(2.0));
    check_caches_match_reference(tree);

    Route route = tree.extract_best_route();
    CHECK(route.length() == 1);
    CHECK(route.total_cost == doctest::Approx(1.0));
    CHECK(route.steps[0].reaction == "R1");
}

TEST_CASE("update early stop when delta is zero") {
    // vm estimate of the expanded node equals the resulting min child rn.
    TestDomain d;
    d.add("t", {{"R", 1.0, {"x"}}});
    d.add("x", {{"Rx", 2.0, {"a"}}});
    d.block("a");
    SearchTree tree("t", [&](const std::string& m) { return d.blocks->count(m) > 0; },
                    [](const std::string& m) { return m == "x" ? 2.0 : 0.0; });
    auto rt = d.cache->expand("t");
    tree.expand(tree.root(), rt);
    tree.update(tree.root(), rt);

    NodeId x = kNoNode;
    for (NodeId id = 0; id < tree.size(); ++id)
        if (tree.node(id).label == "x") x = id;
    REQUIRE(x != kNoNode);

    std::set<NodeId> visited;
    tree.visit_hook = [&](NodeId id) { visited.insert(id); };
    auto rx = d.cache->expand("x");
    tree.expand(x, rx);
    tree.update(x, rx);
    // rn(x) stays 2.0, so no ancestor above x is visited.
    CHECK(visited.count(tree.root()) == 0);
    check_caches_match_reference(tree);
}

TEST_CASE("dead end expansion propagates infinity") {
    TestDomain d;
    d.add("t", {{"R", 1.0, {"x"}}});
    d.add("x", {});
    SearchTree tree("t", [](const std::string&) { return false; }, zero_vm());
    auto rt = d.cache->expand("t");
    tree.expand(tree.root(), rt);
    tree.update(tree.root(), rt);
    NodeId x = kNoNode;
    for (NodeId id = 0; id < tree.size(); ++id)
        if (tree.node(id).label == "x") x = id;
    ExpansionResult empty;
    tree.expand(x, empty);
    tree.update(x, empty);
    CHECK(tree.node(x).rn == kInf);
    CHECK_FALSE(tree.node(x).is_solved);
    CHECK(tree.node(tree.root()).rn == kInf);
    check_caches_match_reference(tree);
}

TEST_CASE("rn_reference examples") {
    auto d = rs_test::two_route_domain();
    SearchTree tree("t", [&](const std::string& m) { return d.blocks->count(m) > 0; },
                    [](const std::string&) { return 3.7; });
    // Frontier OR node with vm 3.7.
    CHECK(tree.rn_reference(tree.root()) == 3.7);
    auto result = d.cache->expand("t");
    tree.expand(tree.root(), result);
    tree.update(tree.root(), result);
    const Node& root = tree.node(tree.root());
    // AND node: c + sum child rn; children available so rn 0.
    CHECK(tree.rn_reference(root.children[0]) == doctest::Approx(1.0));
    // Expanded OR node: min over children.
    CHECK(tree.rn_reference(tree.root()) == doctest::Approx(1.0));
}

TEST_CASE("rn_reference sum and min rules on a hand-built stump") {
    TestDomain d;
    d.add("t", {{"R1", 1.5, {"a", "b"}}, {"R2", 1.0, {"c"}}});
    d.block("a");
    SearchTree tree("t", [&](const std::string& m) { return d.blocks->count(m) > 0; },
                    [](const std::string& m) { return m == "b" ? 2.0 : 0.0; });
    auto result = d.cache->expand("t");
    tree.expand(tree.root(), result);
    tree.update(tree.root(), result);
    const Node& root = tree.node(tree.root());
    CHECK(tree.rn_reference(root.children[0]) == doctest::Approx(3.5));  // 1.5 + 0 + 2.0
    CHECK(tree.rn_reference(root.children[1]) == doctest::Approx(1.0));
    CHECK(tree.rn_reference(tree.root()) == doctest::Approx(1.0));
}

TEST_CASE("vt_reference examples") {
    auto d = rs_test::two_route_domain();
    SearchTree tree("t", [&](const std::string& m) { return d.blocks->count(m) > 0; },
                    [](const std::string&) { return 0.5; });
    // Root only: vm estimate.
    CHECK(tree.vt_reference(tree.root()) == 0.5);
    auto result = d.cache->expand("t");
    tree.expand(tree.root(), result);
    tree.update(tree.root(), result);
    // Child molecule under R1: V_t = c(R1) + rn(a) = 1.
    const Node& r1 = tree.node(tree.node(tree.root()).children[0]);
    CHECK(tree.vt_reference(r1.children[0]) == doctest::Approx(1.0));
    check_caches_match_reference(tree);
}

TEST_CASE("or siblings share V_t") {
    auto d = rs_test::two_route_domain();
    SearchTree tree("t", [](const std::string&) { return false; },
                    [](const std::string&) { return 0.25; });
    auto result = d.cache->expand("t");
    tree.expand(tree.root(), result);
    tree.update(tree.root(), result);
    const Node& r2 = tree.node(tree.node(tree.root()).children[1]);
    REQUIRE(r2.children.size() == 2);
    CHECK(tree.vt_of(r2.children[0]) == tree.vt_of(r2.children[1]));
    CHECK(tree.vt_reference(r2.children[0]) ==
          doctest::Approx(tree.vt_reference(r2.children[1])));
}

TEST_CASE("extract_best_route edge cases") {
    SearchTree avail("t", [](const std::string&) { return true; }, zero_vm());
    Route r = avail.extract_best_route();
    CHECK(r.length() == 0);
    CHECK(r.total_cost == 0.0);

    SearchTree unsolved("t", [](const std::string&) { return false; }, zero_vm());
    CHECK_THROWS_AS(unsolved.extract_best_route(), NoRouteFound);
}

TEST_CASE("extract_best_route tie goes to creation order") {
    TestDomain d;
    d.add("t", {{"R1", 1.0, {"a"}}, {"R2", 1.0, {"b"}}});
    d.block("a");
    d.block("b");
    SearchTree tree("t", [&](const std::string& m) { return d.blocks->count(m) > 0; },
                    zero_vm());
    auto result = d.cache->expand("t");
    tree.expand(tree.root(), result);
    tree.update(tree.root(), result);
    CHECK(tree.extract_best_route().steps[0].reaction == "R1");
}

TEST_CASE("cached values equal reference after every update step") {
    // Property: run full searches on random instances and check the
    // equivalence contract after each expansion.
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        auto d = rs_test::random_domain(seed);
        auto instance = d.instance("m0");
        SearchTree tree(instance.target, instance.available, zero_vm());
        std::size_t steps = 0;
        while (!tree.frontier_empty() && steps < 40) {
            NodeId next = tree.select_next();
            auto result = instance.expand(tree.node(next).label);
            tree.expand(next, result);
            tree.update(next, result);
            check_caches_match_reference(tree);
            ++steps;
        }
    }
}

TEST_CASE("update visits only ancestors and their hanging subtrees") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto d = rs_test::random_domain(seed, 14);
        auto instance = d.instance("m0");
        SearchTree tree(instance.target, instance.available,
                        [](const std::string&) { return 0.1; });
        std::size_t steps = 0;
        while (!tree.frontier_empty() && steps < 25) {
            NodeId next = tree.select_next();
            auto result = instance.expand(tree.node(next).label);
            tree.expand(next, result);

            // Allowed: the expanded node and its new stump, its ancestors,
            // and anything inside subtrees hanging off those ancestors.
            std::set<NodeId> ancestors;
            for (NodeId cur = next; cur != kNoNode; cur = tree.node(cur).parent)
                ancestors.insert(cur);
            auto allowed = [&](NodeId id) {
                for (NodeId cur = id; cur != kNoNode; cur = tree.node(cur).parent)
                    if (ancestors.count(cur)) return true;
                return false;
            };
            std::set<NodeId> visited;
            tree.visit_hook = [&](NodeId id) { visited.insert(id); };
            tree.update(next, result);
            tree.visit_hook = nullptr;
            for (NodeId id : visited) CHECK(allowed(id));
            ++steps;
        }
    }
}

TEST_CASE("rn stays within [0, optimal] under admissible oracle") {
    for (std::uint64_t seed = 100; seed < 140; ++seed) {
        auto d = rs_test::random_domain(seed);
        auto instance = d.instance("m0");
        double optimal = brute_force_optimal(instance).cost;
        SearchTree tree(instance.target, instance.available, zero_vm());
        std::size_t steps = 0;
        while (!tree.frontier_empty() && steps < 40) {
            NodeId next = tree.select_next();
            auto result = instance.expand(tree.node(next).label);
            tree.expand(next, result);
            tree.update(next, result);
            ++steps;
            double rn = tree.node(tree.root()).rn;
            CHECK(rn >= 0.0);
            if (optimal < kInf) CHECK(rn <= optimal + 1e-9);
        }
    }
}

TEST_CASE("snapshot lists every node and edge") {
    auto d = rs_test::two_route_domain();
    SearchTree tree("t", [&](const std::string& m) { return d.blocks->count(m) > 0; },
                    zero_vm());
    auto result = d.cache->expand("t");
    tree.expand(tree.root(), result);
    tree.update(tree.root(), result);
    auto j = tree.snapshot();
    CHECK(j["nodes"].size() == tree.size());
    CHECK(j["edges"].size() == 5);
    CHECK(j["root"] == tree.root());
}
