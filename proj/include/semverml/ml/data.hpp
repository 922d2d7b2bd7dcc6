#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "semverml/error.hpp"
#include "semverml/features/dataset.hpp"

namespace semverml::ml {

/// Row-major design matrix with 0/1 labels. `ids` trace rows back to
/// releases; synthetic rows carry a "syn:" prefix.
struct BinaryDataset {
    std::size_t cols = 0;
    std::vector<double> X;
    std::vector<int> y;
    std::vector<std::string> ids;
    std::vector<std::string> feature_names;

    BinaryDataset() = default;
    explicit BinaryDataset(std::size_t d) : cols(d) {}

    [[nodiscard]] std::size_t rows() const noexcept { return y.size(); }

    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept { return {X.data() + i * cols, cols}; }

    [[nodiscard]] double at(std::size_t i, std::size_t j) const noexcept { return X[i * cols + j]; }

    void push(std::span<const double> r, int label, std::string id)
    {
        if (r.size() != cols) {
            throw Error(ErrorKind::InvalidArgument, "row width mismatch");
        }
        for (double v : r) {
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::InvalidArgument, "non-finite feature value in " + id);
            }
        }
        X.insert(X.end(), r.begin(), r.end());
        y.push_back(label != 0 ? 1 : 0);
        ids.push_back(std::move(id));
    }

    [[nodiscard]] std::size_t positives() const noexcept
    {
        std::size_t n = 0;
        for (int v : y) {
            n += static_cast<std::size_t>(v);
        }
        return n;
    }

    [[nodiscard]] bool both_classes() const noexcept
    {
        const auto p = positives();
        return p > 0 && p < rows();
    }

    [[nodiscard]] BinaryDataset select(const std::vector<std::size_t>& idx) const
    {
        BinaryDataset out(cols);
        out.feature_names = feature_names;
        out.X.reserve(idx.size() * cols);
        for (auto i : idx) {
            out.X.insert(out.X.end(), X.begin() + static_cast<std::ptrdiff_t>(i * cols),
                         X.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols));
            out.y.push_back(y[i]);
            out.ids.push_back(ids[i]);
        }
        return out;
    }
};

/// One-vs-rest view of a feature dataset restricted to `columns`.
[[nodiscard]] inline BinaryDataset make_binary(const features::Dataset& ds, ReleaseType target,
                                               const std::vector<std::size_t>& columns)
{
    BinaryDataset out(columns.size());
    for (auto c : columns) {
        out.feature_names.emplace_back(features::feature_names.at(c));
    }
    std::vector<double> buf(columns.size());
    for (const auto& r : ds.rows) {
        for (std::size_t k = 0; k < columns.size(); ++k) {
            buf[k] = r.values[columns[k]];
        }
        out.push(buf, r.label == target ? 1 : 0, r.release_id);
    }
    return out;
}

[[nodiscard]] inline std::vector<std::size_t> all_columns()
{
    std::vector<std::size_t> cols(features::feature_count);
    for (std::size_t i = 0; i < cols.size(); ++i) {
        cols[i] = i;
    }
    return cols;
}

}  // namespace semverml::ml
