#pragma once

/**
 * File-backed expansion cache: a JSON Lines file mapping molecules to
 * their one-step proposals. Stands in for a neural one-step model.
 *
 * Each line: {"mol": id, "proposals": [{"rxn": id, "cost": x | "prob": p,
 * "reactants": [ids...]}, ...]}. Exactly one of cost/prob per proposal;
 * probabilities are converted to costs via -ln p. Unknown molecules
 * expand to an empty result (dead end).
 */

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "retrostar/common.hpp"
#include "retrostar/expansion.hpp"

#include <nlohmann/json.hpp>

namespace retrostar {

class ExpansionCache {
public:
    static ExpansionCache parse(std::istream& in) {
        ExpansionCache cache;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error& e) {
                throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
            }
            if (!j.contains("mol") || !j.contains("proposals"))
                throw ParseError("line must have 'mol' and 'proposals'", line_no);
            ExpansionResult result;
            for (const auto& pj : j.at("proposals")) {
                Proposal p;
                if (!pj.contains("rxn")) throw ParseError("proposal missing 'rxn'", line_no);
                p.reaction = pj.at("rxn").get<std::string>();
                const bool has_cost = pj.contains("cost");
                const bool has_prob = pj.contains("prob");
                if (has_cost == has_prob)
                    throw ParseError("proposal needs exactly one of cost/prob", line_no);
                if (has_cost) {
                    p.cost = pj.at("cost").get<double>();
                    if (p.cost < 0.0) throw ParseError("negative cost", line_no);
                } else {
                    double prob = pj.at("prob").get<double>();
                    if (!(prob > 0.0 && prob <= 1.0))
                        throw ParseError("prob must be in (0, 1]", line_no);
                    p.cost = -std::log(prob);
                }
                if (!pj.contains("reactants") || pj.at("reactants").empty())
                    throw ParseError("proposal missing reactants", line_no);
                for (const auto& r : pj.at("reactants"))
                    p.reactants.push_back(r.get<std::string>());
                result.proposals.push_back(std::move(p));
            }
            cache.entries_[j.at("mol").get<std::string>()] = std::move(result);
        }
        return cache;
    }

    static ExpansionCache load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw SearchError("cannot open expansion cache: " + path);
        return parse(in);
    }

    ExpansionResult expand(const std::string& molecule) const {
        auto it = entries_.find(molecule);
        return it == entries_.end() ? ExpansionResult{} : it->second;
    }

    const std::map<std::string, ExpansionResult>& entries() const { return entries_; }

    void add(const std::string& molecule, ExpansionResult result) {
        entries_[molecule] = std::move(result);
    }

    void write(std::ostream& out) const {
        for (const auto& [mol, result] : entries_) {
            nlohmann::json props = nlohmann::json::array();
            for (const Proposal& p : result.proposals)
                props.push_back({{"rxn", p.reaction}, {"cost", p.cost},
                                 {"reactants", p.reactants}});
            out << nlohmann::json{{"mol", mol}, {"proposals", props}}.dump() << '\n';
        }
    }

private:
    std::map<std::string, ExpansionResult> entries_;
};

inline std::set<std::string> load_building_blocks(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SearchError("cannot open building block list: " + path);
    std::set<std::string> blocks;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) blocks.insert(line);
    }
    return blocks;
}

/// Instance factory over a shared immutable cache and block set.
inline PlanningInstance make_cached_instance(std::shared_ptr<const ExpansionCache> cache,
                                             std::shared_ptr<const std::set<std::string>> blocks,
                                             const std::string& target) {
    PlanningInstance instance;
    instance.target = target;
    instance.available = [blocks](const std::string& m) { return blocks->count(m) > 0; };
    instance.expand = [cache](const std::string& m) { return cache->expand(m); };
    return instance;
}

}  // namespace retrostar
