#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "semverml/ml/evaluate.hpp"
#include "semverml/ml/models.hpp"
#include "semverml/ml/resample.hpp"
#include "semverml/ml/stats.hpp"
#include "support/planted.hpp"
#include "support/tempdir.hpp"

using namespace semverml;
using namespace semverml::ml;

namespace {

BinaryDataset make(const std::vector<std::vector<double>>& rows, const std::vector<int>& y)
{
    BinaryDataset ds(rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) ds.push(rows[i], y[i], "r" + std::to_string(i));
    for (std::size_t j = 0; j < ds.cols; ++j) ds.feature_names.push_back("f" + std::to_string(j));
    return ds;
}

// class 1 rows sit at least `margin` above class 0 rows in column 0; the
// remaining columns are noise
BinaryDataset separable(std::size_t n, std::size_t cols, std::uint64_t seed, double margin = 1.0)
{
    Rng rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = rng.uniform() < 0.35 ? 1 : 0;
        std::vector<double> r(cols);
        for (auto& v : r) v = rng.uniform() * 3.0;
        r[0] = label ? 1.0 + margin + rng.uniform() : rng.uniform();
        rows.push_back(r);
        y.push_back(label);
    }
    return make(rows, y);
}

BinaryDataset noisy(std::size_t n, std::size_t cols, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> r(cols);
        for (auto& v : r) v = std::floor(rng.uniform() * 6.0);
        rows.push_back(r);
        y.push_back(r[0] + r[1] + rng.uniform() * 4.0 > 6.0 ? 1 : 0);
    }
    return make(rows, y);
}

std::vector<double> predictions(const TrainedModel& m, const BinaryDataset& ds)
{
    std::vector<double> out;
    for (std::size_t i = 0; i < ds.rows(); ++i) out.push_back(m.predict(ds.row(i)));
    return out;
}

double accuracy(const TrainedModel& m, const BinaryDataset& ds)
{
    std::size_t ok = 0;
    for (std::size_t i = 0; i < ds.rows(); ++i) ok += (m.predict(ds.row(i)) > 0.5 ? 1 : 0) == ds.y[i] ? 1 : 0;
    return static_cast<double>(ok) / static_cast<double>(ds.rows());
}

template <typename F>
std::optional<ErrorKind> kind_of(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

double brute_auc(const std::vector<double>& s, const std::vector<int>& y)
{
    double num = 0;
    double pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[i] == 1 && y[j] == 0) {
                pairs += 1;
                num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
            }
        }
    }
    return num / pairs;
}

}  // namespace

// ------------------------------------------------------------------ decision tree

TEST(DecisionTree, OneDimensionalThreshold)
{
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (int x = 0; x <= 10; ++x) {
        rows.push_back({static_cast<double>(x)});
        y.push_back(x > 5 ? 1 : 0);
    }
    const auto m = train_decision_tree(make(rows, y));
    ASSERT_EQ(m.trees.size(), 1u);
    const auto& t = m.trees[0];
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t[0].feature, 0);
    EXPECT_GE(t[0].threshold, 5.0);
    EXPECT_LT(t[0].threshold, 6.0);
    EXPECT_EQ(accuracy(m, make(rows, y)), 1.0);
}

TEST(DecisionTree, IdenticalRowsGiveOneLeaf)
{
    const auto ds = make({{1, 2}, {1, 2}, {1, 2}, {1, 2}}, {1, 0, 1, 1});
    const auto m = train_decision_tree(ds);
    ASSERT_EQ(m.trees.at(0).size(), 1u);
    EXPECT_DOUBLE_EQ(m.predict(ds.row(0)), 0.75);
}

TEST(DecisionTree, XorNeedsDepthTwo)
{
    const auto ds = make({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0});
    const auto m = train_decision_tree(ds);
    EXPECT_EQ(tree_depth(m.trees.at(0)), 2);
    EXPECT_EQ(accuracy(m, ds), 1.0);
    // every first split has zero gain, so the tie rule picks feature 0
    EXPECT_EQ(m.trees[0][0].feature, 0);
}

TEST(DecisionTree, SingleClassRejected)
{
    EXPECT_EQ(kind_of([] { (void)train_decision_tree(make({{1}, {2}}, {1, 1})); }), ErrorKind::SingleClassInput);
    EXPECT_EQ(kind_of([] { (void)train_gbt(make({{1}, {2}}, {0, 0}), {}, 0); }), ErrorKind::SingleClassInput);
    EXPECT_EQ(kind_of([] { (void)train_logistic(make({{1}, {2}}, {0, 0})); }), ErrorKind::SingleClassInput);
}

TEST(DecisionTree, DepthAndLeafLimits)
{
    const auto ds = noisy(200, 5, 3);
    DTParams p;
    p.max_depth = 2;
    EXPECT_LE(tree_depth(train_decision_tree(ds, p).trees[0]), 2);
    p = {};
    p.min_leaf = 20;
    const auto m = train_decision_tree(ds, p);
    // at most 10 leaves of 20 rows each
    EXPECT_GT(m.trees[0].size(), 1u);
    EXPECT_LE(m.trees[0].size(), 19u);
}

// ------------------------------------------------------------------ random forest

TEST(RandomForest, DegenerateForestEqualsTree)
{
    const auto ds = noisy(150, 6, 8);
    RFParams p;
    p.n_trees = 1;
    p.max_features = ds.cols;
    p.bootstrap = false;
    EXPECT_EQ(predictions(train_random_forest(ds, p, 42), ds), predictions(train_decision_tree(ds), ds));
}

TEST(RandomForest, SameSeedSameModel)
{
    const auto ds = noisy(120, 8, 1);
    RFParams p;
    p.n_trees = 15;
    const auto a = to_json(train_random_forest(ds, p, 9)).dump();
    EXPECT_EQ(a, to_json(train_random_forest(ds, p, 9)).dump());
    EXPECT_NE(a, to_json(train_random_forest(ds, p, 10)).dump());
}

TEST(RandomForest, OutOfBagAccuracyOnSeparableData)
{
    const auto ds = separable(200, 6, 4);
    const auto m = train_random_forest(ds, RFParams{}, 4);
    ASSERT_TRUE(m.oob_accuracy);
    EXPECT_GE(*m.oob_accuracy, 0.9);
}

// ------------------------------------------------------------------ boosting

TEST(Gbt, ZeroRoundsIsThePrior)
{
    const auto ds = noisy(80, 4, 2);
    GBTParams p;
    p.n_rounds = 0;
    const auto m = train_gbt(ds, p, 0);
    const double prior = static_cast<double>(ds.positives()) / static_cast<double>(ds.rows());
    for (double s : predictions(m, ds)) EXPECT_NEAR(s, prior, 1e-12);
}

TEST(Gbt, TrainingLossNeverRises)
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto ds = noisy(150, 6, 100 + seed);
        std::vector<double> trace;
        GBTParams p;
        p.n_rounds = 50;
        (void)train_gbt(ds, p, seed, &trace);
        ASSERT_EQ(trace.size(), 51u);
        for (std::size_t r = 1; r < trace.size(); ++r) EXPECT_LE(trace[r], trace[r - 1] + 1e-12) << r;
        EXPECT_LE(trace.back(), trace.front() + 1e-12);
    }
}

TEST(Gbt, SeparableDataRanksPerfectly)
{
    const auto ds = separable(150, 5, 6);
    const auto m = train_gbt(ds, GBTParams{}, 6);
    EXPECT_EQ(roc_auc(predictions(m, ds), ds.y), 1.0);
}

// ------------------------------------------------------------------ logistic regression

TEST(Logistic, WeightSignTowardPositiveClass)
{
    const auto ds = make({{0}, {1}, {2}, {3}, {6}, {7}, {8}, {9}}, {0, 0, 0, 0, 1, 1, 1, 1});
    const auto m = train_logistic(ds);
    EXPECT_GT(m.weights.at(0), 0.0);
    EXPECT_GT(m.predict(std::vector<double>{9}), 0.5);
    EXPECT_LT(m.predict(std::vector<double>{0}), 0.5);
}

TEST(Logistic, ConstantColumnHasZeroWeight)
{
    const auto ds = make({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {6, 0}, {7, 0}}, {0, 0, 1, 0, 1, 1});
    const auto m = train_logistic(ds);
    EXPECT_EQ(m.weights.at(1), 0.0);
    EXPECT_EQ(m.scale.at(1), 0.0);
    EXPECT_TRUE(m.converged);
}

TEST(Logistic, GradientMatchesFiniteDifferences)
{
    const auto ds = noisy(120, 5, 77);
    LRParams p;
    const auto m = train_logistic(ds, p);
    const auto obj = standardize(ds, p.l2).objective;
    std::vector<double> theta = m.weights;
    theta.push_back(m.bias);
    const auto g = obj.gradient(theta);
    const double h = 1e-5;
    for (std::size_t j = 0; j < theta.size(); ++j) {
        auto up = theta;
        auto dn = theta;
        up[j] += h;
        dn[j] -= h;
        const double fd = (obj.value(up) - obj.value(dn)) / (2 * h);
        EXPECT_NEAR(g[j], fd, 1e-4 * std::max(1.0, std::abs(fd))) << j;
    }
    // and the returned point is stationary
    double norm = 0;
    for (double v : g) norm += v * v;
    EXPECT_LT(std::sqrt(norm) / static_cast<double>(ds.rows()), p.tol * 1.0000001);
}

// ------------------------------------------------------------------ zero-r

TEST(ZeroR, PredictsTrainingPrevalence)
{
    std::vector<std::vector<double>> rows(10, std::vector<double>{1.0});
    const auto ds = make(rows, {1, 1, 1, 0, 0, 0, 0, 0, 0, 0});
    const auto m = zero_r(ds);
    for (double s : predictions(m, ds)) EXPECT_DOUBLE_EQ(s, 0.3);
    EXPECT_EQ(roc_auc(predictions(m, ds), ds.y), 0.5);

    BinaryDataset empty(0);
    empty.push({}, 1, "a");
    empty.push({}, 0, "b");
    EXPECT_DOUBLE_EQ(zero_r(empty).predict({}), 0.5);
}

// ------------------------------------------------------------------ smote

TEST(Smote, SyntheticPointsOnSegment)
{
    const auto ds = make({{0, 0}, {2, 2}, {5, 1}, {6, 1}, {7, 1}, {8, 1}, {9, 1}, {5, 0}}, {1, 1, 0, 0, 0, 0, 0, 0});
    SmoteOptions o;
    o.k = 1;
    const auto out = smote(ds, o, 3);
    EXPECT_EQ(out.positives(), 6u);
    for (std::size_t i = ds.rows(); i < out.rows(); ++i) {
        EXPECT_EQ(out.y[i], 1);
        EXPECT_DOUBLE_EQ(out.at(i, 0), out.at(i, 1));
        EXPECT_GE(out.at(i, 0), 0.0);
        EXPECT_LE(out.at(i, 0), 2.0);
    }
}

TEST(Smote, BalancedInputUnchanged)
{
    const auto ds = make({{0}, {1}, {2}, {3}}, {0, 1, 0, 1});
    const auto out = smote(ds, {}, 1);
    EXPECT_EQ(out.X, ds.X);
    EXPECT_EQ(out.ids, ds.ids);
}

TEST(Smote, CountsAndOriginalsPreserved)
{
    Rng rng(12);
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (int i = 0; i < 50; ++i) {
        rows.push_back({rng.uniform(), rng.uniform() * 10, std::floor(rng.uniform() * 4)});
        y.push_back(i < 10 ? 1 : 0);
    }
    const auto ds = make(rows, y);
    const auto out = smote(ds, {}, 5);
    EXPECT_EQ(out.positives(), 40u);
    EXPECT_EQ(out.rows() - out.positives(), 40u);
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        EXPECT_EQ(out.ids[i], ds.ids[i]);
        for (std::size_t j = 0; j < ds.cols; ++j) EXPECT_EQ(out.at(i, j), ds.at(i, j));
    }
}

TEST(Smote, ConvexCombinationOfNearestNeighbours)
{
    const std::size_t k = 3;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        std::vector<std::vector<double>> rows;
        std::vector<int> y;
        for (int i = 0; i < 30; ++i) {
            rows.push_back({rng.uniform() * 5, rng.uniform() * 5, rng.uniform() * 5});
            y.push_back(i % 4 == 0 ? 1 : 0);
        }
        const auto ds = make(rows, y);
        SmoteOptions o;
        o.k = k;
        const auto out = smote(ds, o, seed);
        std::vector<std::size_t> minority;
        for (std::size_t i = 0; i < ds.rows(); ++i) {
            if (ds.y[i] == 1) minority.push_back(i);
        }
        for (std::size_t s = ds.rows(); s < out.rows(); ++s) {
            // id is syn:<base>~<neighbour>#n
            const auto& id = out.ids[s];
            const auto tilde = id.find('~');
            const auto hash = id.find('#');
            const std::string a_id = id.substr(4, tilde - 4);
            const std::string b_id = id.substr(tilde + 1, hash - tilde - 1);
            const auto a = static_cast<std::size_t>(std::find(ds.ids.begin(), ds.ids.end(), a_id) - ds.ids.begin());
            const auto b = static_cast<std::size_t>(std::find(ds.ids.begin(), ds.ids.end(), b_id) - ds.ids.begin());
            ASSERT_LT(a, ds.rows());
            ASSERT_LT(b, ds.rows());
            // b is among the k nearest minority rows of a
            std::vector<std::pair<double, std::size_t>> d;
            for (auto m : minority) {
                if (m == a) continue;
                double s2 = 0;
                for (std::size_t j = 0; j < ds.cols; ++j) s2 += (ds.at(a, j) - ds.at(m, j)) * (ds.at(a, j) - ds.at(m, j));
                d.emplace_back(s2, m);
            }
            std::sort(d.begin(), d.end());
            bool near = false;
            for (std::size_t t = 0; t < k; ++t) near = near || d[t].second == b;
            EXPECT_TRUE(near) << id;
            // residual to the segment
            double num = 0;
            double den = 0;
            for (std::size_t j = 0; j < ds.cols; ++j) {
                num += (out.at(s, j) - ds.at(a, j)) * (ds.at(b, j) - ds.at(a, j));
                den += (ds.at(b, j) - ds.at(a, j)) * (ds.at(b, j) - ds.at(a, j));
            }
            const double u = den > 0 ? num / den : 0.0;
            EXPECT_GE(u, -1e-12);
            EXPECT_LE(u, 1 + 1e-12);
            double res = 0;
            for (std::size_t j = 0; j < ds.cols; ++j) {
                const double r = out.at(s, j) - (ds.at(a, j) + u * (ds.at(b, j) - ds.at(a, j)));
                res += r * r;
            }
            EXPECT_LT(std::sqrt(res), 1e-9);
        }
    }
}

TEST(Smote, TooFewMinorityWarns)
{
    const auto ds = make({{0}, {1}, {2}, {3}}, {1, 0, 0, 0});
    Diagnostics diag;
    const auto out = smote(ds, {}, 1, &diag);
    EXPECT_EQ(out.rows(), 4u);
    EXPECT_TRUE(diag.contains("TooFewMinority"));
}

// ------------------------------------------------------------------ folds

TEST(KFold, BalancedTenRows)
{
    const std::vector<int> y = {0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
    const auto f = stratified_kfold(y, 5, 1);
    for (std::size_t k = 0; k < 5; ++k) {
        int pos = 0;
        int neg = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (f[i] == k) (y[i] ? pos : neg)++;
        }
        EXPECT_EQ(pos, 1);
        EXPECT_EQ(neg, 1);
    }
    EXPECT_EQ(f, stratified_kfold(y, 5, 1));
}

TEST(KFold, PartitionAndProportionBound)
{
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 5 + rng.below(80);
        const std::size_t k = 2 + rng.below(6);
        std::vector<int> y(n);
        for (auto& v : y) v = rng.uniform() < 0.3 ? 1 : 0;
        const auto f = stratified_kfold(y, k, trial);
        ASSERT_EQ(f.size(), n);
        for (int cls : {0, 1}) {
            const double total = static_cast<double>(std::count(y.begin(), y.end(), cls));
            for (std::size_t fold = 0; fold < k; ++fold) {
                double c = 0;
                for (std::size_t i = 0; i < n; ++i) c += (f[i] == fold && y[i] == cls) ? 1 : 0;
                EXPECT_LE(std::abs(c - total / static_cast<double>(k)), 1.0);
            }
        }
        for (auto v : f) EXPECT_LT(v, k);
    }
}

TEST(KFold, SmallClassWarns)
{
    Diagnostics diag;
    (void)stratified_kfold({0, 0, 0, 0, 0, 0, 1, 1}, 5, 0, &diag);
    EXPECT_TRUE(diag.contains("ClassSmallerThanK"));
    EXPECT_EQ(kind_of([] { (void)stratified_kfold({0, 1}, 1, 0); }), ErrorKind::InvalidArgument);
}

// ------------------------------------------------------------------ auc and tests

TEST(Auc, Examples)
{
    EXPECT_EQ(roc_auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}), 1.0);
    EXPECT_EQ(roc_auc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, std::vector<int>{0, 1, 0, 1}), 0.5);
    EXPECT_DOUBLE_EQ(*roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}), 0.75);
    EXPECT_FALSE(roc_auc(std::vector<double>{0.1, 0.4}, std::vector<int>{1, 1}));
}

TEST(Auc, MatchesBruteForceAndTransforms)
{
    Rng rng(21);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng.below(29);
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = std::floor(rng.uniform() * 8) / 4.0;  // plenty of ties
            y[i] = rng.uniform() < 0.5 ? 1 : 0;
        }
        y[0] = 0;
        y[1] = 1;
        const double a = *roc_auc(s, y);
        EXPECT_NEAR(a, brute_auc(s, y), 1e-12);
        std::vector<double> ex(n), aff(n), neg(n);
        for (std::size_t i = 0; i < n; ++i) {
            ex[i] = std::exp(s[i]);
            aff[i] = 3.0 * s[i] - 7.0;
            neg[i] = -s[i];
        }
        EXPECT_NEAR(*roc_auc(ex, y), a, 1e-12);
        EXPECT_NEAR(*roc_auc(aff, y), a, 1e-12);
        EXPECT_NEAR(*roc_auc(neg, y) + a, 1.0, 1e-12);
    }
}

TEST(Stats, RelativeAuc)
{
    EXPECT_DOUBLE_EQ(relative_auc(0.20, 0.10), 2.0);
    EXPECT_DOUBLE_EQ(relative_auc(0.7, 0.7), 1.0);
    EXPECT_EQ(kind_of([] { (void)relative_auc(0.7, 0.0); }), ErrorKind::DivisionByZeroBaseline);
}

TEST(Stats, MannWhitneyExact)
{
    const std::vector<double> a = {1, 2, 3};
    const std::vector<double> b = {10, 11, 12};
    const auto r = mann_whitney(a, b);
    EXPECT_TRUE(r.exact);
    EXPECT_EQ(r.U, 0.0);
    EXPECT_NEAR(r.p, 0.1, 1e-12);
    EXPECT_NEAR(mann_whitney(b, a).p, 0.1, 1e-12);
    // scipy.stats.mannwhitneyu(method="exact")
    const auto r2 = mann_whitney(std::vector<double>{1, 5, 9, 13}, std::vector<double>{2, 3, 4, 20, 21});
    EXPECT_EQ(r2.U, 9.0);
    EXPECT_NEAR(r2.p, 0.9047619047619049, 1e-12);
}

TEST(Stats, MannWhitneyIdenticalSamples)
{
    const std::vector<double> a = {0.7, 0.8, 0.8, 0.9, 0.75, 0.6};
    EXPECT_GE(mann_whitney(a, a).p, 0.99);
    const std::vector<double> b = {1, 2, 3, 4, 5, 6};
    EXPECT_GE(mann_whitney(b, b).p, 0.99);
}

TEST(Stats, MannWhitneyNormalApproximation)
{
    // reference values from scipy.stats.mannwhitneyu(method="asymptotic", use_continuity=True)
    struct Case {
        std::vector<double> a, b;
        double U, p;
    };
    const std::vector<Case> cases = {
        {{1, 2, 2, 3, 4, 5, 5, 6}, {2, 3, 5, 7, 8, 8, 9}, 12.5, 0.07983871964585261},
        {{0.91, 0.88, 0.93, 0.90, 0.95}, {0.5, 0.5, 0.5, 0.5, 0.5}, 25.0, 0.007494957516935239},
        {{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, {5, 6, 7, 8, 9, 10, 11, 12, 13, 14}, 18.0, 0.017006577801423665},
    };
    for (const auto& c : cases) {
        const auto r = mann_whitney(c.a, c.b);
        EXPECT_FALSE(r.exact);
        EXPECT_DOUBLE_EQ(r.U, c.U);
        EXPECT_NEAR(r.p, c.p, 1e-10);
    }
}

TEST(Stats, MannWhitneyUIdentity)
{
    Rng rng(8);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> a(1 + rng.below(10)), b(1 + rng.below(10));
        for (auto& v : a) v = std::floor(rng.uniform() * 5);
        for (auto& v : b) v = std::floor(rng.uniform() * 5);
        EXPECT_DOUBLE_EQ(mann_whitney(a, b).U + mann_whitney(b, a).U, static_cast<double>(a.size() * b.size()));
        const double p = mann_whitney(a, b).p;
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
    }
    EXPECT_EQ(kind_of([] { (void)mann_whitney(std::vector<double>{}, std::vector<double>{1}); }), ErrorKind::EmptySample);
}

TEST(Stats, CliffsDelta)
{
    const auto hi = cliffs_delta(std::vector<double>{5, 6, 7}, std::vector<double>{1, 2, 3});
    EXPECT_EQ(hi.d, 1.0);
    EXPECT_EQ(hi.magnitude, EffectMagnitude::Large);
    const auto eq = cliffs_delta(std::vector<double>{1, 2, 2}, std::vector<double>{2, 1, 2});
    EXPECT_EQ(eq.d, 0.0);
    EXPECT_EQ(eq.magnitude, EffectMagnitude::Small);
    const auto q = cliffs_delta(std::vector<double>{1, 2}, std::vector<double>{1, 3});
    EXPECT_DOUBLE_EQ(q.d, -0.25);
    EXPECT_EQ(q.magnitude, EffectMagnitude::Small);
    EXPECT_EQ(delta_magnitude(0.3299), EffectMagnitude::Small);
    EXPECT_EQ(delta_magnitude(-0.33), EffectMagnitude::Medium);
    EXPECT_EQ(delta_magnitude(0.4739), EffectMagnitude::Medium);
    EXPECT_EQ(delta_magnitude(0.474), EffectMagnitude::Large);
}

// ------------------------------------------------------------------ prediction

TEST(Ovr, ArgmaxAndTies)
{
    const auto a = ovr_decide({0.9, 0.2, 0.1});
    EXPECT_EQ(a.type, ReleaseType::Major);
    EXPECT_FALSE(a.tie);
    const auto b = ovr_decide({0.4, 0.4, 0.4});
    EXPECT_EQ(b.type, ReleaseType::Major);
    EXPECT_TRUE(b.tie);
    const auto c = ovr_decide({0.1, 0.5, 0.5});
    EXPECT_EQ(c.type, ReleaseType::Minor);
    EXPECT_TRUE(c.tie);
    EXPECT_EQ(ovr_decide({0.1, 0.2, 0.3}).type, ReleaseType::Patch);
}

TEST(Ovr, MissingModelIsNoModel)
{
    const features::FeatureVector fv;
    EXPECT_EQ(kind_of([&] { (void)ovr_predict({nullptr, nullptr, nullptr}, fv); }), ErrorKind::NoModel);
}

TEST(Models, JsonRoundTripScoresMatch)
{
    const auto ds = noisy(90, 5, 13);
    ModelParams p;
    p.rf.n_trees = 10;
    p.gbt.n_rounds = 20;
    testutil::TempDir tmp;
    for (auto algo : all_algorithms) {
        const auto m = train(algo, ds, p, 5);
        const auto path = tmp.path() / (std::string(to_string(algo)) + ".json");
        save_model(m, path);
        const auto back = load_model(path);
        EXPECT_EQ(back.algorithm, algo);
        EXPECT_EQ(back.feature_names, ds.feature_names);
        for (std::size_t i = 0; i < ds.rows(); ++i) {
            EXPECT_NEAR(back.predict(ds.row(i)), m.predict(ds.row(i)), 1e-12) << to_string(algo);
        }
        for (const auto& t : back.trees) {
            for (const auto& n : t) EXPECT_LT(n.feature, static_cast<int>(ds.cols));
        }
    }
    EXPECT_EQ(kind_of([&] { (void)load_model(tmp.path() / "missing.json"); }), ErrorKind::NoModel);
    tmp.write("bad.json", "{\"algorithm\":\"dt\"}");
    EXPECT_EQ(kind_of([&] { (void)load_model(tmp.path() / "bad.json"); }), ErrorKind::NoModel);
}

TEST(Models, PredictMapsFeaturesByName)
{
    const auto corpus = planted::make_package("p", 120, 3);
    const auto bin = make_binary(corpus, ReleaseType::Major, features::dimension_columns(features::Dimension::Dependency));
    const auto m = train_decision_tree(bin);
    for (std::size_t i = 0; i < bin.rows(); ++i) {
        EXPECT_EQ(predict(m, corpus.rows[i]), m.predict(bin.row(i)));
    }
}

// ------------------------------------------------------------------ evaluation

TEST(Evaluate, PlantedSignalGbtWithin)
{
    const auto ds = planted::make_package("solo", 200, 11);
    EvalOptions o;
    o.seed = 3;
    const auto r = evaluate_within(ds, Algorithm::GBT, ReleaseType::Major, o);
    ASSERT_TRUE(r.mean_auc());
    EXPECT_GE(*r.mean_auc(), 0.9);
    EXPECT_EQ(r.folds.size(), 5u);
    EXPECT_EQ(r.leaked(), 0u);
}

TEST(Evaluate, ZeroRIsChance)
{
    const auto ds = planted::make_package("solo", 150, 12);
    for (auto target : all_targets) {
        const auto r = evaluate_within(ds, Algorithm::ZeroR, target, {});
        ASSERT_TRUE(r.mean_auc());
        EXPECT_NEAR(*r.mean_auc(), 0.5, 0.05);
    }
}

TEST(Evaluate, DeterministicUnderSeed)
{
    const auto ds = planted::make_package("solo", 120, 13);
    EvalOptions o;
    o.seed = 99;
    o.params.rf.n_trees = 20;
    for (auto algo : {Algorithm::RF, Algorithm::GBT, Algorithm::LR}) {
        const auto a = evaluate_within(ds, algo, ReleaseType::Minor, o);
        const auto b = evaluate_within(ds, algo, ReleaseType::Minor, o);
        ASSERT_EQ(a.folds.size(), b.folds.size());
        for (std::size_t f = 0; f < a.folds.size(); ++f) EXPECT_EQ(a.folds[f].auc, b.folds[f].auc);
    }
}

TEST(Evaluate, RepeatsMultiplyFolds)
{
    const auto ds = planted::make_package("solo", 100, 14);
    EvalOptions o;
    o.repeats = 3;
    const auto r = evaluate_within(ds, Algorithm::DT, ReleaseType::Patch, o);
    EXPECT_EQ(r.folds.size(), 15u);
}

TEST(Evaluate, TestFoldPurity)
{
    const auto ds = planted::make_package("solo", 150, 15);
    const auto bin = make_binary(ds, ReleaseType::Major, all_columns());
    EvalOptions o;
    o.seed = 5;
    for (auto algo : all_algorithms) {
        o.params.rf.n_trees = 5;
        o.params.gbt.n_rounds = 5;
        const auto r = evaluate_binary(bin, algo, o);
        EXPECT_EQ(r.leaked(), 0u);
        for (const auto& f : r.folds) EXPECT_GE(f.train_rows, bin.rows() - f.test_rows);
    }
    // the audit itself notices a leak
    EXPECT_EQ(ml::detail::audit_leakage(bin, bin.select({0, 1, 2})), 3u);
}

TEST(Evaluate, DimensionProjection)
{
    const auto ds = planted::make_package("dep", 250, 16, planted::Signal::Dependency);
    EXPECT_EQ(features::dimension_columns(features::Dimension::ChangeType).size(), 20u);
    EvalOptions o;
    o.seed = 1;
    const auto dep = evaluate_dimension(ds, features::Dimension::Dependency, Algorithm::GBT, ReleaseType::Major, o);
    const auto ct = evaluate_dimension(ds, features::Dimension::ChangeType, Algorithm::GBT, ReleaseType::Major, o);
    EXPECT_GT(*dep.mean_auc(), *ct.mean_auc());

    auto flat = ds;
    for (auto& r : flat.rows) {
        for (auto c : features::dimension_columns(features::Dimension::Textual)) r.values[c] = 1.0;
    }
    const auto none = evaluate_dimension(flat, features::Dimension::Textual, Algorithm::RF, ReleaseType::Major, o);
    EXPECT_NEAR(*none.mean_auc(), 0.5, 0.05);
}

TEST(Evaluate, CrossPackage)
{
    const auto corpus = planted::make_corpus(2, 200, 17);
    const auto pkgs = split_by_package(corpus);
    ASSERT_EQ(pkgs.size(), 2u);
    EvalOptions o;
    o.seed = 2;
    const auto a = evaluate_cross(pkgs, Algorithm::GBT, ReleaseType::Major, o);
    const auto b = evaluate_cross(pkgs, Algorithm::GBT, ReleaseType::Major, o);
    ASSERT_EQ(a.size(), 2u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_TRUE(a[i].outcome.auc);
        EXPECT_GE(*a[i].outcome.auc, 0.85) << a[i].package;
        EXPECT_EQ(a[i].outcome.leaked, 0u);
        EXPECT_EQ(a[i].outcome.test_rows, 200u);
        EXPECT_EQ(a[i].outcome.auc, b[i].outcome.auc);
    }
    EXPECT_EQ(a[0].package, "pkg0");
}

TEST(Evaluate, SingleClassTestFoldIsUndefined)
{
    // three positives among 40 rows and 5 folds: two folds get none
    features::Dataset ds;
    for (int i = 0; i < 40; ++i) {
        features::FeatureVector fv;
        fv.package = "p";
        fv.release_id = "p@" + std::to_string(i) + ".0.0";
        fv.label = i < 3 ? ReleaseType::Major : ReleaseType::Patch;
        fv.values[0] = i < 3 ? 5.0 : 0.0;
        ds.add(fv);
    }
    Diagnostics diag;
    const auto r = evaluate_within(ds, Algorithm::DT, ReleaseType::Major, {}, &diag);
    EXPECT_EQ(r.undefined(), 2u);
    EXPECT_EQ(r.defined_aucs().size(), 3u);
}
