#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "semverml/error.hpp"
#include "semverml/features/dataset.hpp"
#include "semverml/ml/data.hpp"
#include "semverml/ml/models.hpp"
#include "semverml/ml/resample.hpp"
#include "semverml/ml/stats.hpp"
#include "semverml/rng.hpp"

namespace semverml::ml {

inline constexpr std::array<ReleaseType, 3> all_targets = {ReleaseType::Major, ReleaseType::Minor,
                                                           ReleaseType::Patch};

struct EvalOptions {
    std::size_t folds = 5;
    std::size_t repeats = 1;  // passes of k-fold; each pass reshuffles
    std::uint64_t seed = 0;
    SmoteOptions smote;
    bool use_smote = true;
    ModelParams params;
};

struct FoldOutcome {
    std::optional<double> auc;  // nullopt: single-class test fold or training split
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
    std::size_t leaked = 0;  // test ids found among training ids
};

struct EvalResult {
    std::vector<FoldOutcome> folds;

    [[nodiscard]] std::vector<double> defined_aucs() const
    {
        std::vector<double> v;
        for (const auto& f : folds) {
            if (f.auc) v.push_back(*f.auc);
        }
        return v;
    }
    [[nodiscard]] std::optional<double> mean_auc() const
    {
        const auto v = defined_aucs();
        if (v.empty()) return std::nullopt;
        return mean_of(v);
    }
    [[nodiscard]] std::size_t undefined() const { return folds.size() - defined_aucs().size(); }
    [[nodiscard]] std::size_t leaked() const
    {
        std::size_t n = 0;
        for (const auto& f : folds) n += f.leaked;
        return n;
    }
};

namespace detail {

inline std::size_t audit_leakage(const BinaryDataset& train_set, const BinaryDataset& test_set)
{
    const std::set<std::string> train_ids(train_set.ids.begin(), train_set.ids.end());
    std::size_t leaked = 0;
    for (const auto& id : test_set.ids) {
        leaked += train_ids.count(id);
    }
    return leaked;
}

// Trains on `train_set` (resampled when enabled) and scores `test_set`.
inline FoldOutcome run_split(const BinaryDataset& train_set, const BinaryDataset& test_set, Algorithm algo,
                             const EvalOptions& opts, std::uint64_t unit_seed, Diagnostics* diag)
{
    FoldOutcome out;
    out.test_rows = test_set.rows();
    const BinaryDataset fitted =
        opts.use_smote ? smote(train_set, opts.smote, mix_seed(unit_seed, 1), diag) : train_set;
    out.train_rows = fitted.rows();
    out.leaked = audit_leakage(fitted, test_set);
    if (!test_set.both_classes()) {
        return out;
    }
    TrainedModel model;
    if (fitted.both_classes() || algo == Algorithm::ZeroR) {
        model = train(algo, fitted, opts.params, mix_seed(unit_seed, 2));
    } else {
        // a single-class training split carries no ranking information
        model = zero_r(fitted);
        if (diag) diag->warn("single-class training split scored as constant");
    }
    std::vector<double> scores(test_set.rows());
    for (std::size_t i = 0; i < test_set.rows(); ++i) {
        scores[i] = model.predict(test_set.row(i));
    }
    out.auc = roc_auc(scores, test_set.y);
    return out;
}

}  // namespace detail

/// k-fold cross-validation inside one binary dataset.
[[nodiscard]] inline EvalResult evaluate_binary(const BinaryDataset& ds, Algorithm algo, const EvalOptions& opts,
                                                Diagnostics* diag = nullptr)
{
    if (opts.folds < 2) {
        throw Error(ErrorKind::InvalidArgument, "folds must be at least 2");
    }
    EvalResult res;
    for (std::size_t rep = 0; rep < opts.repeats; ++rep) {
        const std::uint64_t rep_seed = mix_seed(opts.seed, rep);
        const auto fold = stratified_kfold(ds.y, opts.folds, mix_seed(rep_seed, 0), diag);
        for (std::size_t f = 0; f < opts.folds; ++f) {
            std::vector<std::size_t> tr;
            std::vector<std::size_t> te;
            for (std::size_t i = 0; i < fold.size(); ++i) {
                (fold[i] == f ? te : tr).push_back(i);
            }
            res.folds.push_back(detail::run_split(ds.select(tr), ds.select(te), algo, opts,
                                                  mix_seed(rep_seed, 100 + f), diag));
        }
    }
    return res;
}

[[nodiscard]] inline EvalResult evaluate_within(const features::Dataset& ds, Algorithm algo, ReleaseType target,
                                                const EvalOptions& opts, Diagnostics* diag = nullptr)
{
    return evaluate_binary(make_binary(ds, target, all_columns()), algo, opts, diag);
}

[[nodiscard]] inline EvalResult evaluate_dimension(const features::Dataset& ds, features::Dimension dim,
                                                   Algorithm algo, ReleaseType target, const EvalOptions& opts,
                                                   Diagnostics* diag = nullptr)
{
    return evaluate_binary(make_binary(ds, target, features::dimension_columns(dim)), algo, opts, diag);
}

struct CrossOutcome {
    std::string package;
    FoldOutcome outcome;
};

/// Leave-one-package-out: train on every other package's rows, test on the
/// held-out package untouched.
[[nodiscard]] inline std::vector<CrossOutcome> evaluate_cross(const std::vector<features::Dataset>& packages,
                                                              Algorithm algo, ReleaseType target,
                                                              const EvalOptions& opts, Diagnostics* diag = nullptr)
{
    std::vector<CrossOutcome> out;
    const auto cols = all_columns();
    for (std::size_t held = 0; held < packages.size(); ++held) {
        features::Dataset pool;
        for (std::size_t p = 0; p < packages.size(); ++p) {
            if (p == held) continue;
            for (const auto& r : packages[p].rows) pool.add(r);
        }
        const auto test_set = make_binary(packages[held], target, cols);
        const auto train_set = make_binary(pool, target, cols);
        const std::string name = packages[held].packages.empty() ? std::to_string(held) : packages[held].packages[0];
        out.push_back({name, detail::run_split(train_set, test_set, algo, opts, mix_seed(opts.seed, 1000 + held), diag)});
    }
    return out;
}

/// Splits a multi-package dataset by package, first-appearance order.
[[nodiscard]] inline std::vector<features::Dataset> split_by_package(const features::Dataset& ds)
{
    std::vector<features::Dataset> out;
    for (const auto& p : ds.packages) out.push_back(ds.subset(p));
    return out;
}

// ------------------------------------------------------------------ prediction

/// Scores a full feature vector with a model trained on any column subset.
[[nodiscard]] inline double predict(const TrainedModel& m, const features::FeatureVector& fv)
{
    std::vector<double> x;
    x.reserve(m.feature_names.size());
    for (const auto& name : m.feature_names) {
        const auto idx = features::feature_index(name);
        if (!idx) throw Error(ErrorKind::SchemaMismatch, "model uses unknown feature " + name);
        x.push_back(fv.values[*idx]);
    }
    return m.predict(x);
}

struct OvrPrediction {
    std::array<double, 3> scores{};  // major, minor, patch
    ReleaseType type = ReleaseType::Major;
    bool tie = false;
};

[[nodiscard]] inline OvrPrediction ovr_decide(const std::array<double, 3>& scores)
{
    OvrPrediction p;
    p.scores = scores;
    std::size_t best = 0;
    for (std::size_t i = 1; i < 3; ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    p.type = all_targets[best];
    for (std::size_t i = 0; i < 3; ++i) {
        if (i != best && scores[i] == scores[best]) p.tie = true;
    }
    return p;
}

[[nodiscard]] inline OvrPrediction ovr_predict(const std::array<const TrainedModel*, 3>& models,
                                               const features::FeatureVector& fv)
{
    std::array<double, 3> s{};
    for (std::size_t i = 0; i < 3; ++i) {
        if (models[i] == nullptr) throw Error(ErrorKind::NoModel, "missing one-vs-rest model");
        s[i] = predict(*models[i], fv);
    }
    return ovr_decide(s);
}

}  // namespace semverml::ml
