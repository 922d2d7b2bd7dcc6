#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "semverml/ml/data.hpp"
#include "semverml/rng.hpp"

namespace semverml::ml {

/// Leaf when feature < 0. Rows with x[feature] <= threshold go left.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool operator==(const TreeNode&) const = default;
};

using Tree = std::vector<TreeNode>;

[[nodiscard]] inline double tree_predict(const Tree& t, std::span<const double> x) noexcept
{
    std::size_t i = 0;
    while (t[i].feature >= 0) {
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(t[i].feature)] <= t[i].threshold ? t[i].left
                                                                                                  : t[i].right);
    }
    return t[i].value;
}

[[nodiscard]] inline int tree_depth(const Tree& t, std::size_t i = 0)
{
    if (t[i].feature < 0) return 0;
    return 1 + std::max(tree_depth(t, static_cast<std::size_t>(t[i].left)),
                        tree_depth(t, static_cast<std::size_t>(t[i].right)));
}

struct TreeParams {
    int max_depth = -1;             // unlimited
    std::size_t min_leaf = 1;
    std::size_t max_features = 0;   // 0 = all columns
};

/// Gini impurity over 0/1 labels; leaf value is the positive fraction.
struct GiniPolicy {
    struct Stats {
        double n = 0.0, pos = 0.0;
        void add(const Stats& o) { n += o.n; pos += o.pos; }
        void sub(const Stats& o) { n -= o.n; pos -= o.pos; }
    };

    const BinaryDataset* ds;

    [[nodiscard]] Stats of(std::size_t row) const { return {1.0, static_cast<double>(ds->y[row])}; }
    [[nodiscard]] static bool pure(const Stats& s) { return s.pos == 0.0 || s.pos == s.n; }
    [[nodiscard]] static double gini(const Stats& s)
    {
        const double p = s.pos / s.n;
        return 2.0 * p * (1.0 - p);
    }
    [[nodiscard]] static double gain(const Stats& l, const Stats& r, const Stats& p)
    {
        return gini(p) - (l.n / p.n) * gini(l) - (r.n / p.n) * gini(r);
    }
    // zero-gain splits are taken while impure: XOR has no first split with positive gain
    [[nodiscard]] static bool accept(double) { return true; }
    [[nodiscard]] static double leaf(const Stats& s) { return s.pos / s.n; }
};

/// Second-order regression on gradients g and hessians h with L2 on leaves.
struct NewtonPolicy {
    struct Stats {
        double n = 0.0, g = 0.0, h = 0.0;
        void add(const Stats& o) { n += o.n; g += o.g; h += o.h; }
        void sub(const Stats& o) { n -= o.n; g -= o.g; h -= o.h; }
    };

    const std::vector<double>* grad;
    const std::vector<double>* hess;
    double lambda = 1.0;

    [[nodiscard]] Stats of(std::size_t row) const { return {1.0, (*grad)[row], (*hess)[row]}; }
    [[nodiscard]] static bool pure(const Stats&) { return false; }
    [[nodiscard]] double score(const Stats& s) const { return s.g * s.g / (s.h + lambda); }
    [[nodiscard]] double gain(const Stats& l, const Stats& r, const Stats& p) const
    {
        return score(l) + score(r) - score(p);
    }
    [[nodiscard]] static bool accept(double gain) { return gain > 1e-12; }
    [[nodiscard]] double leaf(const Stats& s) const { return -s.g / (s.h + lambda); }
};

/// Greedy CART growth. Ties go to the lower feature index, then the lower
/// threshold, because candidates are scanned in that order and only a
/// strictly better gain replaces the incumbent.
template <typename Policy>
class TreeBuilder {
public:
    TreeBuilder(const BinaryDataset& ds, Policy policy, TreeParams params, Rng* rng)
        : ds_(ds), policy_(std::move(policy)), params_(params), rng_(rng)
    {
    }

    Tree build(std::vector<std::size_t> rows)
    {
        tree_.clear();
        grow(rows, 0);
        return std::move(tree_);
    }

private:
    using Stats = typename Policy::Stats;

    const BinaryDataset& ds_;
    Policy policy_;
    TreeParams params_;
    Rng* rng_;
    Tree tree_;
    std::vector<std::pair<double, std::size_t>> buf_;

    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double gain = 0.0;
    };

    std::vector<std::size_t> candidate_order()
    {
        std::vector<std::size_t> f(ds_.cols);
        std::iota(f.begin(), f.end(), std::size_t{0});
        const std::size_t m = params_.max_features;
        if (m == 0 || m >= ds_.cols || rng_ == nullptr) {
            return f;
        }
        for (std::size_t i = 0; i < f.size(); ++i) {  // full Fisher-Yates, prefix sorted below
            std::swap(f[i], f[i + rng_->below(f.size() - i)]);
        }
        std::sort(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(m));
        return f;
    }

    // Best split on one feature; returns false when the column is constant
    // over these rows or no threshold satisfies min_leaf.
    bool scan(std::size_t feature, const std::vector<std::size_t>& rows, const Stats& total, Split& best, bool& any)
    {
        buf_.clear();
        for (auto r : rows) {
            buf_.emplace_back(ds_.at(r, feature), r);
        }
        std::sort(buf_.begin(), buf_.end());
        if (buf_.front().first == buf_.back().first) {
            return false;
        }
        Stats left;
        const std::size_t n = buf_.size();
        bool valid = false;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            left.add(policy_.of(buf_[k].second));
            if (buf_[k].first == buf_[k + 1].first) continue;
            if (k + 1 < params_.min_leaf || n - k - 1 < params_.min_leaf) continue;
            valid = true;
            Stats right = total;
            right.sub(left);
            const double g = policy_.gain(left, right, total);
            if (!any || g > best.gain + 1e-12 * std::max(1.0, std::abs(best.gain))) {
                double thr = (buf_[k].first + buf_[k + 1].first) / 2.0;
                if (!(thr < buf_[k + 1].first)) thr = buf_[k].first;
                best = {static_cast<int>(feature), thr, g};
                any = true;
            }
        }
        return valid;
    }

    int grow(const std::vector<std::size_t>& rows, int depth)
    {
        Stats total;
        for (auto r : rows) {
            total.add(policy_.of(r));
        }
        const int id = static_cast<int>(tree_.size());
        tree_.push_back(TreeNode{-1, 0.0, -1, -1, policy_.leaf(total)});

        const bool depth_ok = params_.max_depth < 0 || depth < params_.max_depth;
        if (!depth_ok || Policy::pure(total) || rows.size() < 2 * std::max<std::size_t>(1, params_.min_leaf)) {
            return id;
        }

        Split best;
        bool any = false;
        const auto order = candidate_order();
        const std::size_t m = (params_.max_features == 0 || params_.max_features >= ds_.cols || rng_ == nullptr)
                                  ? ds_.cols
                                  : params_.max_features;
        bool valid = false;
        for (std::size_t i = 0; i < order.size(); ++i) {
            // beyond the sampled subset, keep drawing only until a usable column appears
            if (i >= m && valid) break;
            valid |= scan(order[i], rows, total, best, any);
        }
        if (!any || !Policy::accept(best.gain)) {
            return id;
        }

        std::vector<std::size_t> lrows;
        std::vector<std::size_t> rrows;
        for (auto r : rows) {
            (ds_.at(r, static_cast<std::size_t>(best.feature)) <= best.threshold ? lrows : rrows).push_back(r);
        }
        const int l = grow(lrows, depth + 1);
        const int r = grow(rrows, depth + 1);
        tree_[static_cast<std::size_t>(id)].feature = best.feature;
        tree_[static_cast<std::size_t>(id)].threshold = best.threshold;
        tree_[static_cast<std::size_t>(id)].left = l;
        tree_[static_cast<std::size_t>(id)].right = r;
        return id;
    }
};

}  // namespace semverml::ml
