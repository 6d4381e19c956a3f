#pragma once

/**
 * Route-dataset extraction: given a set of reactions and a set of
 * building blocks, compute the best route value v(m) for every
 * synthesizable molecule via a Bellman-style fixpoint over the reaction
 * hypergraph, and emit one training tuple per synthesizable non-block
 * molecule (best producing reaction + all alternatives).
 *
 * Two modes: Unit counts reactions (shortest routes), Cost uses the
 * supplied reaction costs (cheapest routes).
 */

#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "retrostar/common.hpp"
#include "retrostar/value_model.hpp"

#include <nlohmann/json.hpp>

namespace retrostar {

struct ReactionRecord {
    std::string id;
    std::string product;
    std::vector<std::string> reactants;
    double cost = 0.0;
};

enum class RouteCostMode { Unit, Cost };

struct RouteDatasetEntry {
    std::string molecule;
    double v = 0.0;
    RouteTuple tuple;
};

struct RouteDataset {
    RouteCostMode mode = RouteCostMode::Cost;
    int feature_dim = 0;
    std::vector<RouteDatasetEntry> entries;

    std::map<std::string, double> value_table() const {
        std::map<std::string, double> t;
        for (const auto& e : entries) t[e.molecule] = e.v;
        return t;
    }
};

/// Bellman fixpoint: v(m) = 0 for blocks, else min over producing
/// reactions of c + sum v(reactants); +inf for unsynthesizable molecules.
inline std::map<std::string, double> fixpoint_values(
    const std::vector<ReactionRecord>& reactions, const std::set<std::string>& blocks,
    RouteCostMode mode) {
    std::map<std::string, double> v;
    for (const std::string& b : blocks) v[b] = 0.0;
    for (const ReactionRecord& r : reactions) {
        if (!v.count(r.product)) v[r.product] = kInf;
        for (const std::string& m : r.reactants)
            if (!v.count(m)) v[m] = kInf;
    }
    for (const std::string& b : blocks) v[b] = 0.0;

    const std::size_t max_iters = v.size() + 1;
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (const ReactionRecord& r : reactions) {
            if (blocks.count(r.product)) continue;
            double total = mode == RouteCostMode::Unit ? 1.0 : r.cost;
            for (const std::string& m : r.reactants) total += v.at(m);
            if (total < v.at(r.product)) {
                v[r.product] = total;
                changed = true;
            }
        }
        if (!changed) return v;
    }
    throw SearchError("route value fixpoint did not converge (internal error)");
}

inline RouteDataset extract_route_dataset(
    const std::vector<ReactionRecord>& reactions, const std::set<std::string>& blocks,
    const std::function<std::vector<double>(const std::string&)>& features,
    RouteCostMode mode = RouteCostMode::Cost,
    const std::map<std::string, double>* exclude_if_same_v = nullptr) {
    for (const ReactionRecord& r : reactions) {
        if (r.cost < 0.0) throw SearchError("negative reaction cost: " + r.id);
        if (r.reactants.empty()) throw SearchError("reaction without reactants: " + r.id);
    }
    auto v = fixpoint_values(reactions, blocks, mode);

    std::map<std::string, std::vector<const ReactionRecord*>> producers;
    for (const ReactionRecord& r : reactions) producers[r.product].push_back(&r);

    RouteDataset out;
    out.mode = mode;
    for (const auto& [mol, value] : v) {
        if (blocks.count(mol) || value == kInf) continue;
        RouteDatasetEntry entry;
        entry.molecule = mol;
        entry.v = value;
        entry.tuple.target_features = features(mol);
        out.feature_dim = static_cast<int>(entry.tuple.target_features.size());

        double best = kInf;
        std::size_t best_idx = 0;
        for (const ReactionRecord* r : producers.at(mol)) {
            double total = mode == RouteCostMode::Unit ? 1.0 : r->cost;
            for (const std::string& m : r->reactants) total += v.at(m);
            RouteCandidate cand;
            cand.cost = mode == RouteCostMode::Unit ? 1.0 : r->cost;
            for (const std::string& m : r->reactants)
                cand.reactant_features.push_back(features(m));
            if (total < best) {
                best = total;
                best_idx = entry.tuple.candidates.size();
            }
            entry.tuple.candidates.push_back(std::move(cand));
        }
        entry.tuple.v = value;
        entry.tuple.best_reaction = best_idx;

        if (exclude_if_same_v) {
            auto it = exclude_if_same_v->find(mol);
            if (it != exclude_if_same_v->end() && it->second == value) continue;
        }
        out.entries.push_back(std::move(entry));
    }
    return out;
}

inline void write_route_dataset(const RouteDataset& ds, std::ostream& out) {
    out << nlohmann::json{{"mode", ds.mode == RouteCostMode::Unit ? "unit" : "cost"},
                          {"feature_dim", ds.feature_dim}}
               .dump()
        << '\n';
    for (const RouteDatasetEntry& e : ds.entries) {
        nlohmann::json cands = nlohmann::json::array();
        for (const RouteCandidate& c : e.tuple.candidates)
            cands.push_back({{"cost", c.cost}, {"reactants", c.reactant_features}});
        out << nlohmann::json{{"mol", e.molecule},
                              {"v", e.v},
                              {"features", e.tuple.target_features},
                              {"best", e.tuple.best_reaction},
                              {"candidates", cands}}
                   .dump()
            << '\n';
    }
}

inline RouteDataset read_route_dataset(std::istream& in) {
    RouteDataset ds;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("missing dataset header", 1);
    ++line_no;
    nlohmann::json header = nlohmann::json::parse(line);
    ds.mode = header.at("mode").get<std::string>() == "unit" ? RouteCostMode::Unit
                                                             : RouteCostMode::Cost;
    ds.feature_dim = header.at("feature_dim").get<int>();
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
        }
        RouteDatasetEntry e;
        e.molecule = j.at("mol").get<std::string>();
        e.v = j.at("v").get<double>();
        e.tuple.v = e.v;
        e.tuple.target_features = j.at("features").get<std::vector<double>>();
        e.tuple.best_reaction = j.at("best").get<std::size_t>();
        for (const auto& cj : j.at("candidates")) {
            RouteCandidate c;
            c.cost = cj.at("cost").get<double>();
            c.reactant_features =
                cj.at("reactants").get<std::vector<std::vector<double>>>();
            e.tuple.candidates.push_back(std::move(c));
        }
        ds.entries.push_back(std::move(e));
    }
    return ds;
}

inline std::vector<RouteTuple> tuples_of(const RouteDataset& ds) {
    std::vector<RouteTuple> out;
    out.reserve(ds.entries.size());
    for (const auto& e : ds.entries) out.push_back(e.tuple);
    return out;
}

}  // namespace retrostar
