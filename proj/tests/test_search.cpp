#include "doctest.h"

#include <cmath>

#include <retrostar/domains/brute_force.hpp>
#include <retrostar/search.hpp>

#include "test_util.hpp"

using namespace retrostar;
using rs_test::TestDomain;

namespace {
SearchTree::ValueFn zero_vm() {
    return [](const std::string&) { return 0.0; };
}
}  // namespace

TEST_CASE("select_next picks minimal V_t with id tie-break") {
    TestDomain d;
    d.add("t", {{"R1", 3.2, {"m1"}}, {"R2", 2.7, {"m2"}}});
    SearchTree tree("t", [](const std::string&) { return false; }, zero_vm());
    auto result = d.cache->expand("t");
    tree.expand(tree.root(), result);
    tree.update(tree.root(), result);
    NodeId picked = tree.select_next();
    CHECK(tree.node(picked).label == "m2");

    // Tie: both 2.7 -> lower id wins.
    TestDomain d2;
    d2.add("t", {{"R1", 2.7, {"m1"}}, {"R2", 2.7, {"m2"}}});
    SearchTree tree2("t", [](const std::string&) { return false; }, zero_vm());
    auto r2 = d2.cache->expand("t");
    tree2.expand(tree2.root(), r2);
    tree2.update(tree2.root(), r2);
    CHECK(tree2.node(tree2.select_next()).label == "m1");
}

TEST_CASE("select_next skips stale entries after V_t rises") {
    TestDomain d;
    d.add("t", {{"R1", 2.7, {"m1"}}, {"R2", 2.7, {"m2"}}});
    d.add("m2", {{"Rm", 4.0, {"b"}}});
    d.block("b");
    SearchTree tree("t", [](const std::string&) { return false; }, zero_vm());
    // b is not available under this predicate; use a fresh domain-aware tree.
    SearchTree t2("t", [&](const std::string& m) { return m == "b"; }, zero_vm());
    auto rt = d.cache->expand("t");
    t2.expand(t2.root(), rt);
    t2.update(t2.root(), rt);
    // Expand m2 out of band so its V_t rises from 2.7 to 4.0.
    NodeId m2 = kNoNode;
    for (NodeId id = 0; id < t2.size(); ++id)
        if (t2.node(id).label == "m2") m2 = id;
    auto rm = d.cache->expand("m2");
    t2.expand(m2, rm);
    t2.update(m2, rm);
    CHECK(t2.node(t2.select_next()).label == "m1");
}

TEST_CASE("select_next on empty frontier throws") {
    SearchTree tree("t", [](const std::string&) { return true; }, zero_vm());
    CHECK_THROWS_AS(tree.select_next(), EmptyFrontier);
}

TEST_CASE("run_search solves the two-route instance optimally") {
    auto d = rs_test::two_route_domain();
    SearchConfig config;
    config.halt_mode = HaltMode::Optimal;
    auto outcome = run_search(d.instance("t"), zero_vm(), config);
    CHECK(outcome.status == SearchStatus::Solved);
    REQUIRE(outcome.route.has_value());
    CHECK(outcome.route->total_cost == doctest::Approx(1.0));
    CHECK(outcome.route->steps[0].reaction == "R1");
    CHECK(outcome.calls_used == 1);
    CHECK(verify_admissible_halt(outcome, 1.0));
}

TEST_CASE("run_search with available target") {
    TestDomain d;
    d.block("t");
    auto outcome = run_search(d.instance("t"), zero_vm(), SearchConfig{});
    CHECK(outcome.status == SearchStatus::Solved);
    CHECK(outcome.route->length() == 0);
    CHECK(outcome.calls_used == 0);
}

TEST_CASE("run_search hits call limit on deep chains") {
    TestDomain d;
    d.add("t", {{"R1", 1.0, {"x1"}}});
    d.add("x1", {{"R2", 1.0, {"x2"}}});
    d.add("x2", {{"R3", 1.0, {"a"}}});
    d.block("a");
    SearchConfig config;
    config.call_limit = 1;
    auto outcome = run_search(d.instance("t"), zero_vm(), config);
    CHECK(outcome.status == SearchStatus::LimitReached);
    CHECK_FALSE(outcome.route.has_value());
    CHECK(outcome.calls_used == 1);
    CHECK(outcome.best_root_rn == doctest::Approx(1.0));  // only R1 expanded so far
}

TEST_CASE("run_search exhausts unsolvable instances") {
    TestDomain d;
    d.add("t", {{"R1", 1.0, {"x"}}});
    d.add("x", {});
    auto outcome = run_search(d.instance("t"), zero_vm(), SearchConfig{});
    CHECK(outcome.status == SearchStatus::Exhausted);
    CHECK(outcome.best_root_rn == kInf);
}

TEST_CASE("cycle filter drops self-producing proposals") {
    TestDomain d;
    d.add("t", {{"R1", 0.1, {"t"}}, {"R2", 5.0, {"a"}}});
    d.block("a");
    SearchConfig config;
    config.halt_mode = HaltMode::Optimal;
    auto outcome = run_search(d.instance("t"), zero_vm(), config);
    CHECK(outcome.status == SearchStatus::Solved);
    CHECK(outcome.route->steps[0].reaction == "R2");
    CHECK(outcome.calls_used == 1);

    config.cycle_filter = false;
    config.call_limit = 10;
    auto loopy = run_search(d.instance("t"), zero_vm(), config);
    // Without the filter the cheap self-loop keeps the frontier V_t below
    // the route cost, so Optimal mode chases it until the budget.
    CHECK(loopy.calls_used == 10);
}

TEST_CASE("verify_admissible_halt detects suboptimal outcomes") {
    auto d = rs_test::two_route_domain();
    SearchConfig config;
    config.halt_mode = HaltMode::Optimal;
    // Inadmissible oracle steering to the worse route on purpose: huge V for a.
    auto vm = [](const std::string& m) { return m == "a" ? 10.0 : 0.0; };
    auto outcome = run_search(d.instance("t"), vm, config);
    CHECK(outcome.status == SearchStatus::Solved);
    // The check must detect whether the result matches the optimum 1.0.
    bool ok = verify_admissible_halt(outcome, 1.0);
    CHECK(ok == (std::abs(outcome.route->total_cost - 1.0) <= 1e-9));
}

TEST_CASE("optimal halting matches brute force on random instances") {
    // Property over 200 seeds: Retro*-0 in Optimal mode returns the exact
    // brute-force optimum (or agrees the instance is unsolvable).
    std::size_t solvable = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto d = rs_test::random_domain(seed);
        auto instance = d.instance("m0");
        auto optimal = brute_force_optimal(instance);
        SearchConfig config;
        config.halt_mode = HaltMode::Optimal;
        config.call_limit = 10000;
        auto outcome = run_search(instance, zero_vm(), config);
        if (optimal.cost == kInf) {
            CHECK(outcome.status != SearchStatus::Solved);
        } else {
            ++solvable;
            REQUIRE(outcome.status == SearchStatus::Solved);
            CHECK(outcome.route->total_cost == doctest::Approx(optimal.cost).epsilon(1e-9));
            CHECK(validate_route(instance, *outcome.route));
        }
    }
    CHECK(solvable > 50);  // the generator produces plenty of solvable cases
}

TEST_CASE("first-solution routes are valid and never beat the optimum") {
    for (std::uint64_t seed = 300; seed < 360; ++seed) {
        auto d = rs_test::random_domain(seed);
        auto instance = d.instance("m0");
        auto optimal = brute_force_optimal(instance);
        SearchConfig config;
        config.call_limit = 10000;
        auto outcome = run_search(instance, zero_vm(), config);
        if (outcome.status != SearchStatus::Solved) continue;
        CHECK(validate_route(instance, *outcome.route));
        CHECK(outcome.route->total_cost >= optimal.cost - 1e-9);
    }
}

TEST_CASE("run_search is deterministic") {
    auto d = rs_test::random_domain(42);
    auto instance = d.instance("m0");
    SearchConfig config;
    config.halt_mode = HaltMode::Optimal;
    auto a = run_search(instance, zero_vm(), config);
    auto b = run_search(instance, zero_vm(), config);
    CHECK(a.status == b.status);
    CHECK(a.calls_used == b.calls_used);
    REQUIRE(a.iterations_log.size() == b.iterations_log.size());
    for (std::size_t i = 0; i < a.iterations_log.size(); ++i) {
        CHECK(a.iterations_log[i].molecule == b.iterations_log[i].molecule);
        CHECK(a.iterations_log[i].vt_at_selection == b.iterations_log[i].vt_at_selection);
    }
}

TEST_CASE("one model call per iteration") {
    auto d = rs_test::random_domain(7);
    auto instance = d.instance("m0");
    std::size_t calls = 0;
    PlanningInstance counted = instance;
    counted.expand = [&](const std::string& m) {
        ++calls;
        return instance.expand(m);
    };
    SearchConfig config;
    config.halt_mode = HaltMode::Optimal;
    auto outcome = run_search(counted, zero_vm(), config);
    CHECK(calls == outcome.calls_used);
    CHECK(outcome.iterations_log.size() == outcome.calls_used);
}
