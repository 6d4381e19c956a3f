/**
 * Command-line harness around the retrostar library.
 *
 * Subcommands:
 *   run            benchmark an algorithm x instance x budget grid, emit CSV
 *   solve          search for a route to a single target and print it
 *   extract-routes build a route-value training dataset from a reaction file
 *   train-value    fit the learned value model on a route dataset
 *   gen-htn        write a synthetic planning instance to disk
 *
 * Set RETROSTAR_LOG=1 (or higher) for progress logging on stderr.
 * Exit codes: 0 success, 1 runtime failure, 2 usage error.
 */

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <retrostar/retrostar.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace {

using namespace retrostar;

int log_level() {
    const char* v = std::getenv("RETROSTAR_LOG");
    if (!v || !*v) return 0;
    return std::atoi(v);
}

void log_line(int level, const std::string& msg) {
    if (log_level() >= level) std::cerr << "[retrostar] " << msg << '\n';
}

struct OracleSpec {
    std::string raw = "zero";
};

/// Parses --oracle {zero|table:PATH|model:PATH} into a callable oracle.
SearchTree::ValueFn make_oracle(const OracleSpec& spec) {
    if (spec.raw == "zero") return [](const std::string&) { return 0.0; };
    if (spec.raw.rfind("table:", 0) == 0) {
        std::string path = spec.raw.substr(6);
        std::ifstream in(path);
        if (!in) throw SearchError("cannot open value table: " + path);
        nlohmann::json j;
        in >> j;
        auto table = std::make_shared<std::map<std::string, double>>();
        for (auto& [mol, val] : j.items()) (*table)[mol] = val.get<double>();
        log_line(1, "loaded value table with " + std::to_string(table->size()) + " entries");
        return [table](const std::string& m) {
            auto it = table->find(m);
            return it == table->end() ? 0.0 : it->second;
        };
    }
    if (spec.raw.rfind("model:", 0) == 0) {
        auto model = std::make_shared<LearnedModel>(LearnedModel::load(spec.raw.substr(6)));
        const int width = model->input_dim;
        log_line(1, "loaded value model, input_dim=" + std::to_string(width));
        return [model, width](const std::string& m) {
            return model->evaluate(hashed_features(m, width));
        };
    }
    throw CLI::ValidationError("--oracle must be zero, table:PATH or model:PATH");
}

HaltMode parse_halt(const std::string& s) {
    if (s == "first") return HaltMode::FirstSolution;
    if (s == "optimal") return HaltMode::Optimal;
    throw CLI::ValidationError("--halt must be 'first' or 'optimal'");
}

PlanningInstance load_cached_instance(const std::string& cache_path,
                                      const std::string& blocks_path,
                                      const std::string& target) {
    auto cache = std::make_shared<ExpansionCache>(ExpansionCache::load(cache_path));
    auto blocks = std::make_shared<std::set<std::string>>(load_building_blocks(blocks_path));
    log_line(1, "loaded " + std::to_string(cache->entries().size()) + " cache entries, " +
                    std::to_string(blocks->size()) + " building blocks");
    return make_cached_instance(cache, blocks, target);
}

std::vector<ReactionRecord> reactions_of(const ExpansionCache& cache) {
    std::vector<ReactionRecord> out;
    for (const auto& [mol, result] : cache.entries())
        for (const Proposal& p : result.proposals)
            out.push_back({p.reaction, mol, p.reactants, p.cost});
    return out;
}

void print_route(const Route& route, std::ostream& out) {
    out << "route: " << route.length() << " steps, total cost "
        << detail::fmt_double(route.total_cost) << '\n';
    for (const RouteStep& s : route.steps) {
        out << "  " << s.product << " <- " << s.reaction << " (cost "
            << detail::fmt_double(s.cost) << ") <-";
        for (const std::string& r : s.reactants) out << ' ' << r;
        out << '\n';
    }
}

void print_summary(const std::map<std::string, AlgorithmSummary>& summary, std::ostream& out) {
    for (const auto& [algo, s] : summary) {
        out << algo << ": mean_calls " << detail::fmt_double(s.mean_calls);
        if (s.ar_count > 0)
            out << ", avg_ar " << detail::fmt_double(s.avg_ar) << ", max_ar "
                << detail::fmt_double(s.max_ar);
        out << ", best_cost " << s.best_cost_count << ", best_length " << s.best_length_count
            << '\n';
        for (const auto& [budget, rate] : s.success_rate)
            out << "  budget " << budget << ": success " << detail::fmt_double(rate) << '\n';
    }
}

int cmd_run(const std::vector<std::string>& algos, const std::vector<std::size_t>& limits,
            const std::string& halt, const OracleSpec& oracle, const std::string& cache_path,
            const std::string& blocks_path, const std::vector<std::string>& targets,
            std::uint64_t seed, std::size_t count, const std::string& out_path) {
    BenchmarkConfig config;
    config.algorithms = algos;
    config.call_limits = limits;
    config.halt_mode = parse_halt(halt);
    config.rng_seed = seed;

    std::vector<NamedInstance> instances;
    if (!cache_path.empty()) {
        if (blocks_path.empty())
            throw CLI::ValidationError("--cache also needs --blocks");
        if (targets.empty())
            throw CLI::ValidationError("cache-backed runs need at least one --target");
        for (const std::string& t : targets)
            instances.push_back({t, load_cached_instance(cache_path, blocks_path, t)});
    } else {
        for (std::uint64_t i = 0; i < count; ++i) {
            HtnParams params;
            params.rng_seed = seed + i;
            std::ostringstream id;
            id << "htn_" << std::setw(4) << std::setfill('0') << (seed + i);
            instances.push_back({id.str(), generate_htn(params).instance});
            log_line(2, "generated instance " + id.str());
        }
    }

    auto vm = make_oracle(oracle);
    std::vector<BenchmarkRow> rows = run_benchmark(instances, vm, config);

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw SearchError("cannot write CSV: " + out_path);
        write_csv(rows, out);
        log_line(1, "wrote " + std::to_string(rows.size()) + " rows to " + out_path);
    } else {
        write_csv(rows, std::cout);
    }
    print_summary(summarize(rows), std::cout);
    return 0;
}

int cmd_solve(const std::string& algo, std::size_t limit, const std::string& halt,
              const OracleSpec& oracle, const std::string& cache_path,
              const std::string& blocks_path, const std::string& target, std::uint64_t seed) {
    PlanningInstance instance = load_cached_instance(cache_path, blocks_path, target);
    BenchmarkConfig config;
    config.halt_mode = parse_halt(halt);
    config.rng_seed = seed;
    auto vm = make_oracle(oracle);
    SearchOutcome out = run_algorithm(algo, instance, vm, limit, config, seed);
    log_line(1, std::string("status ") + status_name(out.status) + ", " +
                    std::to_string(out.calls_used) + " expansion calls");
    if (log_level() >= 2)
        for (const IterationRecord& it : out.iterations_log)
            log_line(2, "iter " + std::to_string(it.iteration) + ": expand " + it.molecule +
                            " (vt " + detail::fmt_double(it.vt_at_selection) + ")");
    if (out.status != SearchStatus::Solved || !out.route) {
        std::cout << "no route found (" << status_name(out.status) << " after "
                  << out.calls_used << " calls)\n";
        return 1;
    }
    std::cout << "solved " << target << " in " << out.calls_used << " calls\n";
    print_route(*out.route, std::cout);
    return 0;
}

int cmd_extract_routes(const std::string& cache_path, const std::string& blocks_path,
                       const std::string& mode, int feature_width, const std::string& out_path) {
    ExpansionCache cache = ExpansionCache::load(cache_path);
    std::set<std::string> blocks = load_building_blocks(blocks_path);
    RouteCostMode cost_mode;
    if (mode == "unit") cost_mode = RouteCostMode::Unit;
    else if (mode == "cost") cost_mode = RouteCostMode::Cost;
    else throw CLI::ValidationError("--mode must be 'unit' or 'cost'");

    auto features = [&](const std::string& m) { return hashed_features(m, feature_width); };
    RouteDataset ds = extract_route_dataset(reactions_of(cache), blocks, features, cost_mode);
    std::ofstream out(out_path);
    if (!out) throw SearchError("cannot write dataset: " + out_path);
    write_route_dataset(ds, out);
    std::cout << "wrote " << ds.entries.size() << " tuples (feature_dim " << ds.feature_dim
              << ") to " << out_path << '\n';
    return 0;
}

int cmd_train_value(const std::string& data_path, const std::string& out_path, int hidden,
                    std::size_t epochs, std::size_t batch, double lr, double lambda,
                    double epsilon, std::uint64_t seed) {
    std::ifstream in(data_path);
    if (!in) throw SearchError("cannot open route dataset: " + data_path);
    RouteDataset ds = read_route_dataset(in);
    log_line(1, "loaded " + std::to_string(ds.entries.size()) + " tuples");

    TrainConfig config;
    config.hidden_dim = hidden;
    config.epochs = epochs;
    config.batch_size = batch;
    config.learning_rate = lr;
    config.lambda = lambda;
    config.epsilon = epsilon;
    config.rng_seed = seed;

    TrainReport report;
    LearnedModel model = train(tuples_of(ds), config, &report);
    model.save(out_path);
    std::cout << "objective " << detail::fmt_double(report.initial_objective) << " -> "
              << detail::fmt_double(report.final_objective) << "; model saved to " << out_path
              << '\n';
    return 0;
}

int cmd_gen_htn(std::uint64_t seed, std::size_t depth, const std::string& out_base) {
    HtnParams params;
    params.rng_seed = seed;
    params.depth = depth;
    HtnInstance htn = generate_htn(params);

    const std::string cache_path = out_base + ".cache.jsonl";
    const std::string blocks_path = out_base + ".blocks.txt";
    const std::string meta_path = out_base + ".meta.json";

    std::ofstream cache_out(cache_path);
    if (!cache_out) throw SearchError("cannot write: " + cache_path);
    htn.cache->write(cache_out);

    std::ofstream blocks_out(blocks_path);
    if (!blocks_out) throw SearchError("cannot write: " + blocks_path);
    for (const std::string& b : *htn.primitives) blocks_out << b << '\n';

    std::ofstream meta_out(meta_path);
    if (!meta_out) throw SearchError("cannot write: " + meta_path);
    meta_out << nlohmann::json{{"target", htn.target},
                               {"seed", seed},
                               {"optimal_cost", *htn.instance.optimal_cost}}
                    .dump(2)
             << '\n';

    std::cout << "target " << htn.target << ", optimal cost "
              << detail::fmt_double(*htn.instance.optimal_cost) << '\n'
              << "wrote " << cache_path << ", " << blocks_path << ", " << meta_path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Best-first AND-OR route search toolkit"};
    app.require_subcommand(1);

    // shared option storage
    std::vector<std::string> algos;
    std::string solve_algo = "retrostar0";
    std::vector<std::size_t> limits = {500};
    std::size_t limit = 500;
    std::string halt = "first";
    OracleSpec oracle;
    std::string cache_path, blocks_path, out_path, target, mode = "cost", data_path;
    std::vector<std::string> targets;
    std::uint64_t seed = 0;
    std::size_t count = 20, depth = 5, epochs = 200, batch = 16;
    int feature_width = 64, hidden = 128;
    double lr = 0.05, lambda = 1.0, epsilon = 0.1;

    CLI::App* run = app.add_subcommand("run", "benchmark algorithms over an instance grid");
    run->add_option("--algo", algos, "algorithms to run")->required();
    run->add_option("--limit", limits, "expansion-call budgets (default 500)");
    run->add_option("--halt", halt, "halting condition: first|optimal");
    run->add_option("--oracle", oracle.raw, "value oracle: zero|table:PATH|model:PATH");
    run->add_option("--cache", cache_path, "expansion cache (JSON Lines)");
    run->add_option("--blocks", blocks_path, "building-block list (one id per line)");
    run->add_option("--target", targets, "target molecules (cache mode)");
    run->add_option("--seed", seed, "first instance seed (generator mode)");
    run->add_option("--count", count, "number of generated instances");
    run->add_option("--out", out_path, "CSV output path (default: stdout)");

    CLI::App* solve = app.add_subcommand("solve", "find and print a route for one target");
    solve->add_option("--algo", solve_algo, "algorithm");
    solve->add_option("--limit", limit, "expansion-call budget");
    solve->add_option("--halt", halt, "halting condition: first|optimal");
    solve->add_option("--oracle", oracle.raw, "value oracle: zero|table:PATH|model:PATH");
    solve->add_option("--cache", cache_path, "expansion cache (JSON Lines)")->required();
    solve->add_option("--blocks", blocks_path, "building-block list")->required();
    solve->add_option("--target", target, "target molecule")->required();
    solve->add_option("--seed", seed, "rng seed (stochastic searchers)");

    CLI::App* extract = app.add_subcommand("extract-routes",
                                           "build a route-value dataset from a reaction cache");
    extract->add_option("--cache", cache_path, "expansion cache (JSON Lines)")->required();
    extract->add_option("--blocks", blocks_path, "building-block list")->required();
    extract->add_option("--mode", mode, "route value mode: unit|cost");
    extract->add_option("--features", feature_width, "hashed feature width");
    extract->add_option("--out", out_path, "dataset output path")->required();

    CLI::App* train_cmd = app.add_subcommand("train-value", "fit the learned value model");
    train_cmd->add_option("--data", data_path, "route dataset (JSON Lines)")->required();
    train_cmd->add_option("--out", out_path, "model output path")->required();
    train_cmd->add_option("--hidden", hidden, "hidden layer width");
    train_cmd->add_option("--epochs", epochs, "training epochs");
    train_cmd->add_option("--batch", batch, "minibatch size");
    train_cmd->add_option("--lr", lr, "learning rate");
    train_cmd->add_option("--lambda", lambda, "consistency loss weight");
    train_cmd->add_option("--epsilon", epsilon, "consistency margin");
    train_cmd->add_option("--seed", seed, "training rng seed");

    CLI::App* gen = app.add_subcommand("gen-htn", "write a synthetic instance to disk");
    gen->add_option("--seed", seed, "generator seed");
    gen->add_option("--depth", depth, "max decomposition depth");
    gen->add_option("--out", out_path, "output base path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help/version -> 0, any parse problem -> usage error
    }

    try {
        if (run->parsed())
            return cmd_run(algos, limits, halt, oracle, cache_path, blocks_path, targets, seed,
                           count, out_path);
        if (solve->parsed())
            return cmd_solve(solve_algo, limit, halt, oracle, cache_path, blocks_path, target,
                             seed);
        if (extract->parsed())
            return cmd_extract_routes(cache_path, blocks_path, mode, feature_width, out_path);
        if (train_cmd->parsed())
            return cmd_train_value(data_path, out_path, hidden, epochs, batch, lr, lambda,
                                   epsilon, seed);
        if (gen->parsed()) return cmd_gen_htn(seed, depth, out_path);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
