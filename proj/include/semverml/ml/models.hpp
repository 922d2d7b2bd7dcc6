#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "semverml/error.hpp"
#include "semverml/ml/data.hpp"
#include "semverml/ml/tree.hpp"
#include "semverml/rng.hpp"

namespace semverml::ml {

enum class Algorithm { GBT, RF, DT, LR, ZeroR };

inline constexpr Algorithm all_algorithms[] = {Algorithm::GBT, Algorithm::RF, Algorithm::DT, Algorithm::LR,
                                               Algorithm::ZeroR};

[[nodiscard]] constexpr std::string_view to_string(Algorithm a) noexcept
{
    switch (a) {
    case Algorithm::GBT: return "xgb";
    case Algorithm::RF: return "rf";
    case Algorithm::DT: return "dt";
    case Algorithm::LR: return "lr";
    case Algorithm::ZeroR: return "zeror";
    }
    return "zeror";
}

[[nodiscard]] inline std::optional<Algorithm> parse_algorithm(std::string_view s) noexcept
{
    for (auto a : all_algorithms) {
        if (to_string(a) == s) return a;
    }
    if (s == "gbt") return Algorithm::GBT;
    return std::nullopt;
}

struct DTParams {
    int max_depth = -1;
    std::size_t min_leaf = 1;
};

struct RFParams {
    std::size_t n_trees = 100;
    std::size_t max_features = 0;  // 0 = floor(sqrt(columns))
    bool bootstrap = true;
    int max_depth = -1;
    std::size_t min_leaf = 1;
};

struct GBTParams {
    std::size_t n_rounds = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
    std::size_t min_leaf = 1;
    double lambda_l2 = 1.0;
};

struct LRParams {
    double l2 = 1.0;
    std::size_t max_iter = 1000;
    double tol = 1e-6;
};

struct ModelParams {
    DTParams dt;
    RFParams rf;
    GBTParams gbt;
    LRParams lr;
};

struct TrainedModel {
    Algorithm algorithm = Algorithm::ZeroR;
    std::uint64_t seed = 0;
    std::vector<std::string> feature_names;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();

    std::vector<Tree> trees;         // DT: 1, RF: averaged, GBT: summed margins
    double base_margin = 0.0;        // GBT
    std::optional<double> oob_accuracy;  // RF with bootstrap

    std::vector<double> weights;     // LR, on standardized inputs
    double bias = 0.0;
    std::vector<double> mean;
    std::vector<double> scale;       // 0 marks a dropped constant column
    bool converged = false;
    std::size_t iterations = 0;

    double prior = 0.0;              // ZeroR

    [[nodiscard]] double predict(std::span<const double> x) const;
};

[[nodiscard]] inline double sigmoid(double z) noexcept
{
    if (z >= 0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + e^z) without overflow
[[nodiscard]] inline double softplus(double z) noexcept
{
    return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline double TrainedModel::predict(std::span<const double> x) const
{
    switch (algorithm) {
    case Algorithm::DT: return tree_predict(trees.front(), x);
    case Algorithm::RF: {
        double s = 0.0;
        for (const auto& t : trees) s += tree_predict(t, x);
        return trees.empty() ? prior : s / static_cast<double>(trees.size());
    }
    case Algorithm::GBT: {
        double f = base_margin;
        for (const auto& t : trees) f += tree_predict(t, x);
        return sigmoid(f);
    }
    case Algorithm::LR: {
        double z = bias;
        for (std::size_t j = 0; j < weights.size(); ++j) {
            if (scale[j] != 0.0) z += weights[j] * (x[j] - mean[j]) / scale[j];
        }
        return sigmoid(z);
    }
    case Algorithm::ZeroR: return prior;
    }
    return prior;
}

namespace detail {

inline void require_both_classes(const BinaryDataset& ds, std::string_view what)
{
    if (!ds.both_classes()) {
        throw Error(ErrorKind::SingleClassInput, std::string(what) + " needs both classes in the training data");
    }
}

inline std::vector<std::size_t> iota_rows(std::size_t n)
{
    std::vector<std::size_t> r(n);
    std::iota(r.begin(), r.end(), std::size_t{0});
    return r;
}

inline TrainedModel skeleton(Algorithm a, const BinaryDataset& ds, std::uint64_t seed)
{
    TrainedModel m;
    m.algorithm = a;
    m.seed = seed;
    m.feature_names = ds.feature_names;
    if (m.feature_names.size() != ds.cols) {
        m.feature_names.clear();
        for (std::size_t j = 0; j < ds.cols; ++j) m.feature_names.push_back("f" + std::to_string(j));
    }
    m.prior = ds.rows() ? static_cast<double>(ds.positives()) / static_cast<double>(ds.rows()) : 0.0;
    return m;
}

}  // namespace detail

[[nodiscard]] inline TrainedModel train_decision_tree(const BinaryDataset& ds, DTParams p = {})
{
    detail::require_both_classes(ds, "decision tree");
    auto m = detail::skeleton(Algorithm::DT, ds, 0);
    m.params = {{"max_depth", p.max_depth}, {"min_leaf", p.min_leaf}, {"criterion", "gini"}};
    TreeBuilder<GiniPolicy> b(ds, GiniPolicy{&ds}, TreeParams{p.max_depth, p.min_leaf, 0}, nullptr);
    m.trees.push_back(b.build(detail::iota_rows(ds.rows())));
    return m;
}

[[nodiscard]] inline TrainedModel train_random_forest(const BinaryDataset& ds, RFParams p, std::uint64_t seed)
{
    detail::require_both_classes(ds, "random forest");
    auto m = detail::skeleton(Algorithm::RF, ds, seed);
    const std::size_t mf = p.max_features == 0
                               ? std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(double(ds.cols)))))
                               : std::min(p.max_features, ds.cols);
    m.params = {{"n_trees", p.n_trees}, {"max_features", mf},       {"bootstrap", p.bootstrap},
                {"max_depth", p.max_depth}, {"min_leaf", p.min_leaf}, {"criterion", "gini"}};
    const std::size_t n = ds.rows();
    std::vector<double> oob_sum(n, 0.0);
    std::vector<int> oob_cnt(n, 0);
    for (std::size_t t = 0; t < p.n_trees; ++t) {
        Rng rng(mix_seed(seed, t));
        std::vector<std::size_t> rows;
        std::vector<char> in_bag(n, 0);
        if (p.bootstrap) {
            rows.reserve(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto r = rng.below(n);
                rows.push_back(r);
                in_bag[r] = 1;
            }
            std::sort(rows.begin(), rows.end());
        } else {
            rows = detail::iota_rows(n);
        }
        TreeBuilder<GiniPolicy> b(ds, GiniPolicy{&ds}, TreeParams{p.max_depth, p.min_leaf, mf}, &rng);
        m.trees.push_back(b.build(std::move(rows)));
        if (p.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) {
                if (!in_bag[i]) {
                    oob_sum[i] += tree_predict(m.trees.back(), ds.row(i));
                    ++oob_cnt[i];
                }
            }
        }
    }
    if (p.bootstrap) {
        std::size_t seen = 0;
        std::size_t correct = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (oob_cnt[i] == 0) continue;
            ++seen;
            const int pred = oob_sum[i] / oob_cnt[i] > 0.5 ? 1 : 0;
            correct += pred == ds.y[i] ? 1 : 0;
        }
        if (seen > 0) m.oob_accuracy = static_cast<double>(correct) / static_cast<double>(seen);
    }
    return m;
}

[[nodiscard]] inline double log_loss_sum(const std::vector<double>& margin, const std::vector<int>& y)
{
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        s += softplus(margin[i]) - y[i] * margin[i];
    }
    return s;
}

/// Gradient boosting on logistic loss. A round whose tree would raise the
/// training loss has its leaves halved until it does not.
[[nodiscard]] inline TrainedModel train_gbt(const BinaryDataset& ds, GBTParams p, std::uint64_t seed,
                                            std::vector<double>* loss_trace = nullptr)
{
    detail::require_both_classes(ds, "gradient boosting");
    auto m = detail::skeleton(Algorithm::GBT, ds, seed);
    m.params = {{"n_rounds", p.n_rounds},   {"learning_rate", p.learning_rate}, {"max_depth", p.max_depth},
                {"min_leaf", p.min_leaf},   {"lambda_l2", p.lambda_l2}};
    const std::size_t n = ds.rows();
    m.base_margin = std::log(m.prior / (1.0 - m.prior));
    std::vector<double> F(n, m.base_margin);
    std::vector<double> g(n);
    std::vector<double> h(n);
    std::vector<double> step(n);
    double loss = log_loss_sum(F, ds.y);
    if (loss_trace) loss_trace->assign(1, loss);
    const auto rows = detail::iota_rows(n);
    for (std::size_t round = 0; round < p.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double q = sigmoid(F[i]);
            g[i] = q - ds.y[i];
            h[i] = std::max(q * (1.0 - q), 1e-16);
        }
        TreeBuilder<NewtonPolicy> b(ds, NewtonPolicy{&g, &h, p.lambda_l2}, TreeParams{p.max_depth, p.min_leaf, 0},
                                    nullptr);
        Tree t = b.build(rows);
        for (auto& node : t) node.value *= p.learning_rate;
        double new_loss = loss;
        for (int attempt = 0; attempt < 60; ++attempt) {
            for (std::size_t i = 0; i < n; ++i) step[i] = F[i] + tree_predict(t, ds.row(i));
            new_loss = log_loss_sum(step, ds.y);
            if (new_loss <= loss) break;
            for (auto& node : t) node.value *= 0.5;
            if (attempt == 59) {
                for (auto& node : t) node.value = 0.0;
                step = F;
                new_loss = loss;
            }
        }
        F.swap(step);
        loss = new_loss;
        if (loss_trace) loss_trace->push_back(loss);
        m.trees.push_back(std::move(t));
    }
    return m;
}

/// Penalized negative log-likelihood of a logistic model on standardized
/// inputs: sum of log-losses + l2/2 * |w|^2, bias unpenalized.
/// theta = (w_0..w_{d-1}, b).
struct LogisticObjective {
    std::vector<double> Z;  // standardized rows, dropped columns zeroed
    std::vector<int> y;
    std::size_t d = 0;
    double l2 = 1.0;

    [[nodiscard]] double value(const std::vector<double>& theta) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            double z = theta[d];
            for (std::size_t j = 0; j < d; ++j) z += theta[j] * Z[i * d + j];
            s += softplus(z) - y[i] * z;
        }
        for (std::size_t j = 0; j < d; ++j) s += 0.5 * l2 * theta[j] * theta[j];
        return s;
    }

    [[nodiscard]] std::vector<double> gradient(const std::vector<double>& theta) const
    {
        std::vector<double> gr(d + 1, 0.0);
        for (std::size_t i = 0; i < y.size(); ++i) {
            double z = theta[d];
            for (std::size_t j = 0; j < d; ++j) z += theta[j] * Z[i * d + j];
            const double r = sigmoid(z) - y[i];
            for (std::size_t j = 0; j < d; ++j) gr[j] += r * Z[i * d + j];
            gr[d] += r;
        }
        for (std::size_t j = 0; j < d; ++j) gr[j] += l2 * theta[j];
        return gr;
    }
};

struct StandardizedData {
    LogisticObjective objective;
    std::vector<double> mean;
    std::vector<double> scale;
};

[[nodiscard]] inline StandardizedData standardize(const BinaryDataset& ds, double l2)
{
    StandardizedData s;
    const std::size_t n = ds.rows();
    const std::size_t d = ds.cols;
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double mu = 0.0;
        for (std::size_t i = 0; i < n; ++i) mu += ds.at(i, j);
        mu /= static_cast<double>(std::max<std::size_t>(1, n));
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (ds.at(i, j) - mu) * (ds.at(i, j) - mu);
        var /= static_cast<double>(std::max<std::size_t>(1, n));
        s.mean[j] = mu;
        const double sd = std::sqrt(var);
        s.scale[j] = sd > 1e-12 * std::max(1.0, std::abs(mu)) ? sd : 0.0;
    }
    auto& o = s.objective;
    o.d = d;
    o.l2 = l2;
    o.y = ds.y;
    o.Z.assign(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (s.scale[j] != 0.0) o.Z[i * d + j] = (ds.at(i, j) - s.mean[j]) / s.scale[j];
        }
    }
    return s;
}

/// Gradient descent with Armijo backtracking. Converged when the gradient
/// norm divided by the row count drops below tol.
[[nodiscard]] inline TrainedModel train_logistic(const BinaryDataset& ds, LRParams p = {})
{
    detail::require_both_classes(ds, "logistic regression");
    auto m = detail::skeleton(Algorithm::LR, ds, 0);
    m.params = {{"l2", p.l2}, {"max_iter", p.max_iter}, {"tol", p.tol}};
    auto sd = standardize(ds, p.l2);
    const auto& obj = sd.objective;
    const std::size_t d = ds.cols;
    const double n = static_cast<double>(ds.rows());
    std::vector<double> theta(d + 1, 0.0);
    theta[d] = std::log(m.prior / (1.0 - m.prior));
    double f = obj.value(theta);
    double t = 1.0 / n;
    std::vector<double> cand(d + 1);
    std::size_t it = 0;
    for (; it < p.max_iter; ++it) {
        const auto gr = obj.gradient(theta);
        double gn2 = 0.0;
        for (double v : gr) gn2 += v * v;
        if (std::sqrt(gn2) / n < p.tol) {
            m.converged = true;
            break;
        }
        t *= 2.0;
        double fc = f;
        for (int bt = 0; bt < 80; ++bt) {
            for (std::size_t j = 0; j <= d; ++j) cand[j] = theta[j] - t * gr[j];
            fc = obj.value(cand);
            if (fc <= f - 0.5 * t * gn2) break;
            t *= 0.5;
        }
        if (!(fc < f)) {
            // no further decrease representable
            m.converged = std::sqrt(gn2) / n < 1e3 * p.tol;
            break;
        }
        theta.swap(cand);
        f = fc;
    }
    m.iterations = it;
    m.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(d));
    for (std::size_t j = 0; j < d; ++j) {
        if (sd.scale[j] == 0.0) m.weights[j] = 0.0;
    }
    m.bias = theta[d];
    m.mean = std::move(sd.mean);
    m.scale = std::move(sd.scale);
    return m;
}

/// Constant scorer: the training prevalence of class 1.
[[nodiscard]] inline TrainedModel zero_r(const BinaryDataset& ds)
{
    auto m = detail::skeleton(Algorithm::ZeroR, ds, 0);
    return m;
}

[[nodiscard]] inline TrainedModel train(Algorithm a, const BinaryDataset& ds, const ModelParams& p,
                                        std::uint64_t seed)
{
    switch (a) {
    case Algorithm::GBT: return train_gbt(ds, p.gbt, seed);
    case Algorithm::RF: return train_random_forest(ds, p.rf, seed);
    case Algorithm::DT: return train_decision_tree(ds, p.dt);
    case Algorithm::LR: return train_logistic(ds, p.lr);
    case Algorithm::ZeroR: return zero_r(ds);
    }
    return zero_r(ds);
}

// ------------------------------------------------------------------ JSON

[[nodiscard]] inline nlohmann::ordered_json to_json(const TrainedModel& m)
{
    using oj = nlohmann::ordered_json;
    oj j;
    j["algorithm"] = to_string(m.algorithm);
    j["seed"] = m.seed;
    j["feature_names"] = m.feature_names;
    j["params"] = m.params;
    switch (m.algorithm) {
    case Algorithm::DT:
    case Algorithm::RF:
    case Algorithm::GBT: {
        if (m.algorithm == Algorithm::GBT) j["base_margin"] = m.base_margin;
        if (m.oob_accuracy) j["oob_accuracy"] = *m.oob_accuracy;
        oj trees = oj::array();
        for (const auto& t : m.trees) {
            oj nodes = oj::array();
            for (const auto& n : t) {
                nodes.push_back(oj::array({n.feature, n.threshold, n.left, n.right, n.value}));
            }
            trees.push_back(std::move(nodes));
        }
        j["trees"] = std::move(trees);
        break;
    }
    case Algorithm::LR:
        j["weights"] = m.weights;
        j["bias"] = m.bias;
        j["mean"] = m.mean;
        j["scale"] = m.scale;
        j["converged"] = m.converged;
        j["iterations"] = m.iterations;
        break;
    case Algorithm::ZeroR: break;
    }
    j["prior"] = m.prior;
    return j;
}

[[nodiscard]] inline TrainedModel model_from_json(const nlohmann::json& j)
{
    try {
        TrainedModel m;
        const auto algo = parse_algorithm(j.at("algorithm").get<std::string>());
        if (!algo) throw Error(ErrorKind::NoModel, "unknown algorithm in model file");
        m.algorithm = *algo;
        m.seed = j.at("seed").get<std::uint64_t>();
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        m.params = nlohmann::ordered_json::parse(j.at("params").dump());
        m.prior = j.value("prior", 0.0);
        const std::size_t d = m.feature_names.size();
        if (j.contains("trees")) {
            for (const auto& t : j["trees"]) {
                Tree tree;
                for (const auto& n : t) {
                    TreeNode node{n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                                  n.at(4).get<double>()};
                    if (node.feature >= static_cast<int>(d)) {
                        throw Error(ErrorKind::NoModel, "split feature index out of range");
                    }
                    tree.push_back(node);
                }
                if (tree.empty()) throw Error(ErrorKind::NoModel, "empty tree in model file");
                m.trees.push_back(std::move(tree));
            }
            m.base_margin = j.value("base_margin", 0.0);
            if (j.contains("oob_accuracy")) m.oob_accuracy = j["oob_accuracy"].get<double>();
        }
        if (m.algorithm == Algorithm::LR) {
            m.weights = j.at("weights").get<std::vector<double>>();
            m.bias = j.at("bias").get<double>();
            m.mean = j.at("mean").get<std::vector<double>>();
            m.scale = j.at("scale").get<std::vector<double>>();
            m.converged = j.value("converged", false);
            m.iterations = j.value("iterations", std::size_t{0});
            if (m.weights.size() != d || m.mean.size() != d || m.scale.size() != d) {
                throw Error(ErrorKind::NoModel, "weight vector does not match feature manifest");
            }
        }
        if ((m.algorithm == Algorithm::DT || m.algorithm == Algorithm::RF) && m.trees.empty()) {
            throw Error(ErrorKind::NoModel, "tree model without trees");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::NoModel, std::string("malformed model file: ") + e.what());
    }
}

inline void save_model(const TrainedModel& m, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write model " + path.string());
    out << to_json(m).dump(1) << '\n';
}

[[nodiscard]] inline TrainedModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::NoModel, "cannot open model " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::NoModel, std::string("malformed model file: ") + e.what());
    }
    return model_from_json(j);
}

}  // namespace semverml::ml
