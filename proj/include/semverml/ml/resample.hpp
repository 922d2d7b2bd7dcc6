#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "semverml/error.hpp"
#include "semverml/ml/data.hpp"
#include "semverml/rng.hpp"

namespace semverml::ml {

struct SmoteOptions {
    std::size_t k = 5;
    double target_ratio = 1.0;  // minority / majority after resampling
};

/// Appends synthetic minority rows x + u * (nn - x) until the minority reaches
/// target_ratio * majority. Original rows are kept verbatim and come first.
[[nodiscard]] inline BinaryDataset smote(const BinaryDataset& ds, SmoteOptions opts, std::uint64_t seed,
                                         Diagnostics* diag = nullptr)
{
    BinaryDataset out = ds;
    const std::size_t pos = ds.positives();
    const std::size_t neg = ds.rows() - pos;
    if (pos == neg || pos == 0 || neg == 0) {
        return out;
    }
    const int minority_label = pos < neg ? 1 : 0;
    const std::size_t majority = std::max(pos, neg);
    std::vector<std::size_t> minority;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        if (ds.y[i] == minority_label) {
            minority.push_back(i);
        }
    }
    if (minority.size() < 2) {
        if (diag) diag->warn("TooFewMinority: fewer than 2 minority rows, resampling skipped");
        return out;
    }
    const auto wanted = static_cast<std::size_t>(std::llround(opts.target_ratio * static_cast<double>(majority)));
    if (wanted <= minority.size()) {
        return out;
    }
    const std::size_t k_eff = std::max<std::size_t>(1, std::min(opts.k, minority.size() - 1));

    // k nearest minority neighbours of every minority row, ties by index
    std::vector<std::vector<std::size_t>> nn(minority.size());
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t a = 0; a < minority.size(); ++a) {
        dist.clear();
        const auto ra = ds.row(minority[a]);
        for (std::size_t b = 0; b < minority.size(); ++b) {
            if (a == b) continue;
            const auto rb = ds.row(minority[b]);
            double d2 = 0.0;
            for (std::size_t j = 0; j < ds.cols; ++j) {
                const double t = ra[j] - rb[j];
                d2 += t * t;
            }
            dist.emplace_back(d2, b);
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_eff), dist.end());
        for (std::size_t t = 0; t < k_eff; ++t) {
            nn[a].push_back(dist[t].second);
        }
    }

    Rng rng(seed);
    std::vector<double> row(ds.cols);
    for (std::size_t s = 0, need = wanted - minority.size(); s < need; ++s) {
        const std::size_t a = rng.below(minority.size());
        const std::size_t b = nn[a][rng.below(k_eff)];
        const double u = rng.uniform();
        const auto ra = ds.row(minority[a]);
        const auto rb = ds.row(minority[b]);
        for (std::size_t j = 0; j < ds.cols; ++j) {
            row[j] = ra[j] + u * (rb[j] - ra[j]);
        }
        out.push(row, minority_label, "syn:" + ds.ids[minority[a]] + "~" + ds.ids[minority[b]] + "#" + std::to_string(s));
    }
    return out;
}

/// Fold index (0..k-1) per row. Each class is shuffled separately and dealt
/// round-robin, the dealer continuing where the previous class stopped.
[[nodiscard]] inline std::vector<std::size_t> stratified_kfold(const std::vector<int>& labels, std::size_t k,
                                                               std::uint64_t seed, Diagnostics* diag = nullptr)
{
    if (k < 2) {
        throw Error(ErrorKind::InvalidArgument, "k must be at least 2");
    }
    std::vector<std::size_t> fold(labels.size(), 0);
    Rng rng(seed);
    std::size_t dealer = 0;
    for (int cls : {0, 1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if ((labels[i] != 0 ? 1 : 0) == cls) idx.push_back(i);
        }
        if (!idx.empty() && idx.size() < k && diag) {
            diag->warn("ClassSmallerThanK: class " + std::to_string(cls) + " has " + std::to_string(idx.size()) +
                       " rows for " + std::to_string(k) + " folds");
        }
        rng.shuffle(idx);
        for (auto i : idx) {
            fold[i] = dealer;
            dealer = (dealer + 1) % k;
        }
    }
    return fold;
}

}  // namespace semverml::ml
