#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "semverml/error.hpp"

namespace semverml::ml {

/// 1-based ranks with ties sharing their mean rank.
[[nodiscard]] inline std::vector<double> midranks(std::span<const double> v)
{
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) {
            ++j;
        }
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            rank[order[k]] = r;
        }
        i = j + 1;
    }
    return rank;
}

/// Probability that a random positive outscores a random negative, ties
/// counting half. Undefined (nullopt) when only one class is present.
[[nodiscard]] inline std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels)
{
    if (scores.size() != labels.size()) {
        throw Error(ErrorKind::InvalidArgument, "scores and labels differ in length");
    }
    const auto rank = midranks(scores);
    double pos = 0.0;
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0) {
            pos += 1.0;
            rank_sum += rank[i];
        }
    }
    const double neg = static_cast<double>(labels.size()) - pos;
    if (pos == 0.0 || neg == 0.0) {
        return std::nullopt;
    }
    return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

[[nodiscard]] inline double relative_auc(double model_auc, double baseline_auc)
{
    if (baseline_auc == 0.0) {
        throw Error(ErrorKind::DivisionByZeroBaseline, "baseline ROC-AUC is zero");
    }
    return model_auc / baseline_auc;
}

struct MannWhitney {
    double U = 0.0;  // statistic of the first sample
    double p = 1.0;  // two-sided
    bool exact = false;
};

namespace detail {

// Number of orderings of n1 + n2 distinct values giving each U, U = 0..n1*n2.
inline std::vector<double> u_distribution(std::size_t n1, std::size_t n2)
{
    // f[i][j][u] built incrementally: place the largest value in either sample.
    const std::size_t umax = n1 * n2;
    std::vector<std::vector<std::vector<double>>> f(
        n1 + 1, std::vector<std::vector<double>>(n2 + 1, std::vector<double>(umax + 1, 0.0)));
    for (std::size_t i = 0; i <= n1; ++i) {
        for (std::size_t j = 0; j <= n2; ++j) {
            if (i == 0 || j == 0) {
                f[i][j][0] = 1.0;
                continue;
            }
            for (std::size_t u = 0; u <= i * j; ++u) {
                // largest in sample 1: it beats all j of sample 2
                double c = u >= j ? f[i - 1][j][u - j] : 0.0;
                c += f[i][j - 1][u];
                f[i][j][u] = c;
            }
        }
    }
    return f[n1][n2];
}

}  // namespace detail

[[nodiscard]] inline MannWhitney mann_whitney(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty()) {
        throw Error(ErrorKind::EmptySample, "Mann-Whitney needs two non-empty samples");
    }
    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    std::vector<double> all(a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    const auto rank = midranks(all);
    double r1 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        r1 += rank[i];
    }
    MannWhitney out;
    out.U = r1 - n1 * (n1 + 1.0) / 2.0;

    std::vector<double> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    bool ties = false;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) {
            ++j;
        }
        const double t = static_cast<double>(j - i);
        if (t > 1.0) {
            ties = true;
            tie_term += t * t * t - t;
        }
        i = j;
    }

    if (!ties && a.size() + b.size() <= 12) {
        const auto dist = detail::u_distribution(a.size(), b.size());
        const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
        const auto u = static_cast<std::size_t>(std::llround(out.U));
        double lower = 0.0;
        double upper = 0.0;
        for (std::size_t k = 0; k < dist.size(); ++k) {
            if (k <= u) lower += dist[k];
            if (k >= u) upper += dist[k];
        }
        out.p = std::min(1.0, 2.0 * std::min(lower, upper) / total);
        out.exact = true;
        return out;
    }

    const double n = n1 + n2;
    const double mu = n1 * n2 / 2.0;
    const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (var <= 0.0) {
        out.p = 1.0;
        return out;
    }
    const double z = std::max(0.0, std::abs(out.U - mu) - 0.5) / std::sqrt(var);
    out.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return out;
}

enum class EffectMagnitude { Small, Medium, Large };

[[nodiscard]] constexpr std::string_view to_string(EffectMagnitude m) noexcept
{
    switch (m) {
    case EffectMagnitude::Small: return "small";
    case EffectMagnitude::Medium: return "medium";
    case EffectMagnitude::Large: return "large";
    }
    return "small";
}

[[nodiscard]] inline EffectMagnitude delta_magnitude(double d) noexcept
{
    const double m = std::abs(d);
    if (m < 0.33) return EffectMagnitude::Small;
    if (m < 0.474) return EffectMagnitude::Medium;
    return EffectMagnitude::Large;
}

struct CliffsDelta {
    double d = 0.0;
    EffectMagnitude magnitude = EffectMagnitude::Small;
};

[[nodiscard]] inline CliffsDelta cliffs_delta(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty()) {
        throw Error(ErrorKind::EmptySample, "Cliff's delta needs two non-empty samples");
    }
    long long gt = 0;
    long long lt = 0;
    for (double x : a) {
        for (double y : b) {
            gt += x > y ? 1 : 0;
            lt += x < y ? 1 : 0;
        }
    }
    CliffsDelta out;
    out.d = static_cast<double>(gt - lt) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
    out.magnitude = delta_magnitude(out.d);
    return out;
}

template <typename T>
[[nodiscard]] double mean_of(const std::vector<T>& v)
{
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (const auto& x : v) s += static_cast<double>(x);
    return s / static_cast<double>(v.size());
}

[[nodiscard]] inline double median_of(std::vector<double> v)
{
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace semverml::ml
