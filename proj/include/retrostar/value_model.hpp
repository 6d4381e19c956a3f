#pragma once

/**
 * Pluggable V_m oracles and the offline trainer for the learned one.
 *
 * The learned model is a small two-layer network (input -> hidden, tanh,
 * hidden -> scalar) whose output goes through softplus so estimates are
 * always finite and nonnegative. Training minimizes a regression loss on
 * the best route cost plus a hinge consistency loss that keeps the best
 * one-step candidate ahead of the alternatives by a margin epsilon.
 */

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "retrostar/common.hpp"

#include <nlohmann/json.hpp>

namespace retrostar {

struct LearnedModel {
    int input_dim = 0;
    int hidden_dim = 128;
    std::vector<double> w1;  // hidden x input, row-major
    std::vector<double> b1;  // hidden
    std::vector<double> w2;  // hidden
    double b2 = 0.0;

    static LearnedModel init(int input_dim, int hidden_dim, std::uint64_t seed) {
        LearnedModel m;
        m.input_dim = input_dim;
        m.hidden_dim = hidden_dim;
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-0.1, 0.1);
        m.w1.resize(static_cast<std::size_t>(hidden_dim) * input_dim);
        m.b1.assign(hidden_dim, 0.0);
        m.w2.resize(hidden_dim);
        for (double& w : m.w1) w = dist(rng);
        for (double& w : m.w2) w = dist(rng);
        m.b2 = dist(rng);
        return m;
    }

    std::size_t param_count() const { return w1.size() + b1.size() + w2.size() + 1; }

    std::vector<double> params() const {
        std::vector<double> p;
        p.reserve(param_count());
        p.insert(p.end(), w1.begin(), w1.end());
        p.insert(p.end(), b1.begin(), b1.end());
        p.insert(p.end(), w2.begin(), w2.end());
        p.push_back(b2);
        return p;
    }

    void set_params(const std::vector<double>& p) {
        if (p.size() != param_count()) throw DimensionMismatch("parameter vector size mismatch");
        auto it = p.begin();
        std::copy(it, it + w1.size(), w1.begin());
        it += static_cast<std::ptrdiff_t>(w1.size());
        std::copy(it, it + b1.size(), b1.begin());
        it += static_cast<std::ptrdiff_t>(b1.size());
        std::copy(it, it + w2.size(), w2.begin());
        it += static_cast<std::ptrdiff_t>(w2.size());
        b2 = *it;
    }

    double evaluate(const std::vector<double>& x) const {
        if (static_cast<int>(x.size()) != input_dim)
            throw DimensionMismatch("feature vector has wrong width");
        double s = b2;
        for (int i = 0; i < hidden_dim; ++i) {
            double z = b1[i];
            const double* row = &w1[static_cast<std::size_t>(i) * input_dim];
            for (int k = 0; k < input_dim; ++k) z += row[k] * x[k];
            s += w2[i] * std::tanh(z);
        }
        return softplus(s);
    }

    /// grad += coeff * dV(x)/dtheta, flat layout matching params().
    void accumulate_gradient(const std::vector<double>& x, double coeff,
                             std::vector<double>& grad) const {
        if (static_cast<int>(x.size()) != input_dim)
            throw DimensionMismatch("feature vector has wrong width");
        std::vector<double> a(hidden_dim);
        double s = b2;
        for (int i = 0; i < hidden_dim; ++i) {
            double z = b1[i];
            const double* row = &w1[static_cast<std::size_t>(i) * input_dim];
            for (int k = 0; k < input_dim; ++k) z += row[k] * x[k];
            a[i] = std::tanh(z);
            s += w2[i] * a[i];
        }
        const double ds = coeff / (1.0 + std::exp(-s));  // softplus'
        const std::size_t off_b1 = w1.size();
        const std::size_t off_w2 = off_b1 + b1.size();
        for (int i = 0; i < hidden_dim; ++i) {
            double dz = ds * w2[i] * (1.0 - a[i] * a[i]);
            double* grow = &grad[static_cast<std::size_t>(i) * input_dim];
            for (int k = 0; k < input_dim; ++k) grow[k] += dz * x[k];
            grad[off_b1 + i] += dz;
            grad[off_w2 + i] += ds * a[i];
        }
        grad.back() += ds;
    }

    static double softplus(double s) {
        if (s > 30.0) return s;
        return std::log1p(std::exp(s));
    }

    nlohmann::json to_json() const {
        return {{"input_dim", input_dim}, {"hidden_dim", hidden_dim},
                {"w1", w1},              {"b1", b1},
                {"w2", w2},              {"b2", b2},
                {"activation", "tanh"},  {"transform", "softplus"}};
    }

    static LearnedModel from_json(const nlohmann::json& j) {
        LearnedModel m;
        m.input_dim = j.at("input_dim").get<int>();
        m.hidden_dim = j.at("hidden_dim").get<int>();
        m.w1 = j.at("w1").get<std::vector<double>>();
        m.b1 = j.at("b1").get<std::vector<double>>();
        m.w2 = j.at("w2").get<std::vector<double>>();
        m.b2 = j.at("b2").get<double>();
        if (m.w1.size() != static_cast<std::size_t>(m.input_dim) * m.hidden_dim ||
            m.b1.size() != static_cast<std::size_t>(m.hidden_dim) ||
            m.w2.size() != static_cast<std::size_t>(m.hidden_dim))
            throw DimensionMismatch("model file has inconsistent layer shapes");
        return m;
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw SearchError("cannot write model file: " + path);
        out << to_json().dump(2) << '\n';
    }

    static LearnedModel load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw SearchError("cannot read model file: " + path);
        nlohmann::json j;
        in >> j;
        return from_json(j);
    }
};

/// One training record: a molecule, its best route cost v, the index of
/// the best one-step candidate, and all candidates with reactant features.
struct RouteCandidate {
    double cost = 0.0;
    std::vector<std::vector<double>> reactant_features;
};

struct RouteTuple {
    std::vector<double> target_features;
    double v = 0.0;
    std::size_t best_reaction = 0;
    std::vector<RouteCandidate> candidates;
};

struct TrainConfig {
    double epsilon = 0.1;
    double lambda = 1.0;
    double learning_rate = 0.05;
    std::size_t epochs = 200;
    std::size_t batch_size = 16;
    std::uint64_t rng_seed = 0;
    int hidden_dim = 128;
};

inline double loss_reg(const LearnedModel& model, const RouteTuple& tuple) {
    double d = model.evaluate(tuple.target_features) - tuple.v;
    return d * d;
}

inline double loss_con(const LearnedModel& model, const RouteTuple& tuple, std::size_t j,
                       double epsilon) {
    if (j >= tuple.candidates.size()) throw IndexOutOfRange("candidate index out of range");
    const RouteCandidate& cand = tuple.candidates[j];
    double sum_v = 0.0;
    for (const auto& feats : cand.reactant_features) sum_v += model.evaluate(feats);
    return std::max(0.0, tuple.v + epsilon - cand.cost - sum_v);
}

/// Per-tuple objective: L_reg + lambda * mean over non-best candidates of L_con.
inline double objective(const LearnedModel& model, const RouteTuple& tuple, double lambda,
                        double epsilon) {
    double total = loss_reg(model, tuple);
    std::size_t n = 0;
    double con = 0.0;
    for (std::size_t j = 0; j < tuple.candidates.size(); ++j) {
        if (j == tuple.best_reaction) continue;
        con += loss_con(model, tuple, j, epsilon);
        ++n;
    }
    if (n > 0) total += lambda * con / static_cast<double>(n);
    return total;
}

inline void accumulate_objective_gradient(const LearnedModel& model, const RouteTuple& tuple,
                                          double lambda, double epsilon, double weight,
                                          std::vector<double>& grad) {
    double pred = model.evaluate(tuple.target_features);
    model.accumulate_gradient(tuple.target_features, weight * 2.0 * (pred - tuple.v), grad);

    std::size_t n = 0;
    for (std::size_t j = 0; j < tuple.candidates.size(); ++j)
        if (j != tuple.best_reaction) ++n;
    if (n == 0) return;
    const double scale = -weight * lambda / static_cast<double>(n);
    for (std::size_t j = 0; j < tuple.candidates.size(); ++j) {
        if (j == tuple.best_reaction) continue;
        if (loss_con(model, tuple, j, epsilon) <= 0.0) continue;
        for (const auto& feats : tuple.candidates[j].reactant_features)
            model.accumulate_gradient(feats, scale, grad);
    }
}

struct TrainReport {
    double initial_objective = 0.0;
    double final_objective = 0.0;
};

inline double mean_objective(const LearnedModel& model, const std::vector<RouteTuple>& dataset,
                             double lambda, double epsilon) {
    double sum = 0.0;
    for (const RouteTuple& t : dataset) sum += objective(model, t, lambda, epsilon);
    return sum / static_cast<double>(dataset.size());
}

inline LearnedModel train(const std::vector<RouteTuple>& dataset, const TrainConfig& config,
                          TrainReport* report = nullptr) {
    if (dataset.empty()) throw EmptyDataset();
    const int input_dim = static_cast<int>(dataset.front().target_features.size());
    for (const RouteTuple& t : dataset) {
        if (static_cast<int>(t.target_features.size()) != input_dim)
            throw DimensionMismatch("inconsistent feature widths in dataset");
    }

    LearnedModel model = LearnedModel::init(input_dim, config.hidden_dim, config.rng_seed);
    if (report) report->initial_objective = mean_objective(model, dataset, config.lambda,
                                                           config.epsilon);

    std::mt19937_64 rng(config.rng_seed + 1);
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> grad(model.param_count());
    std::vector<double> params = model.params();

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            std::size_t end = std::min(order.size(), start + config.batch_size);
            std::fill(grad.begin(), grad.end(), 0.0);
            const double w = 1.0 / static_cast<double>(end - start);
            for (std::size_t i = start; i < end; ++i)
                accumulate_objective_gradient(model, dataset[order[i]], config.lambda,
                                              config.epsilon, w, grad);
            params = model.params();
            for (std::size_t i = 0; i < params.size(); ++i)
                params[i] -= config.learning_rate * grad[i];
            model.set_params(params);
        }
    }
    if (report) report->final_objective = mean_objective(model, dataset, config.lambda,
                                                         config.epsilon);
    return model;
}

/// Unified oracle surface used by the searchers: molecule id -> V_m.
class ValueOracle {
public:
    using FeatureFn = std::function<std::vector<double>(const std::string&)>;

    static ValueOracle zero() { return ValueOracle(); }

    static ValueOracle table(std::map<std::string, double> values) {
        ValueOracle o;
        o.table_ = std::move(values);
        return o;
    }

    static ValueOracle learned(LearnedModel model, FeatureFn features) {
        ValueOracle o;
        o.model_ = std::move(model);
        o.features_ = std::move(features);
        return o;
    }

    /// Unknown table ids fall back to 0, the universal lowerbound.
    double operator()(const std::string& molecule) const {
        if (model_) return model_->evaluate(features_(molecule));
        auto it = table_.find(molecule);
        return it == table_.end() ? 0.0 : it->second;
    }

private:
    std::map<std::string, double> table_;
    std::optional<LearnedModel> model_;
    FeatureFn features_;
};

}  // namespace retrostar
