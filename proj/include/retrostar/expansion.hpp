#pragma once

/**
 * Expansion-model interface shared by all searchers.
 *
 * A one-step model maps a molecule (or task) id to at most k proposals,
 * each carrying a reaction id, a nonnegative cost and the reactant set
 * needed to produce the queried molecule.
 */

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "retrostar/common.hpp"

namespace retrostar {

struct Proposal {
    std::string reaction;
    double cost = 0.0;
    std::vector<std::string> reactants;
};

struct ExpansionResult {
    std::vector<Proposal> proposals;
};

struct RouteStep {
    std::string product;
    std::string reaction;
    double cost = 0.0;
    std::vector<std::string> reactants;
};

struct Route {
    std::vector<RouteStep> steps;
    double total_cost = 0.0;

    std::size_t length() const { return steps.size(); }
};

/// A planning domain: target, available set I, one-step expansion function.
/// expand must be deterministic and pure per molecule.
struct PlanningInstance {
    std::string target;
    std::function<bool(const std::string&)> available;
    std::function<ExpansionResult(const std::string&)> expand;
    std::optional<double> optimal_cost;  // ground truth, when known
};

}  // namespace retrostar
