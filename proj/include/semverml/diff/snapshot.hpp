#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "semverml/error.hpp"
#include "semverml/js/ast.hpp"

namespace semverml::diff {

namespace fs = std::filesystem;

[[nodiscard]] inline std::optional<std::string> read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) {
        return std::nullopt;
    }
    return std::move(ss).str();
}

[[nodiscard]] inline bool is_js_path(std::string_view path) noexcept { return path.ends_with(".js"); }

/// Regular files under `root` keyed by '/'-separated relative path. VCS
/// metadata and installed dependencies are not part of a release snapshot.
[[nodiscard]] inline std::map<std::string, fs::path> list_snapshot_files(const fs::path& root)
{
    std::map<std::string, fs::path> files;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw Error(ErrorKind::Io, "snapshot is not a directory: " + root.string());
    }
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
    if (ec) {
        throw Error(ErrorKind::Io, "cannot read snapshot " + root.string() + ": " + ec.message());
    }
    for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) {
            break;
        }
        const auto name = it->path().filename().string();
        if (it->is_directory(ec) && (name == ".git" || name == "node_modules")) {
            it.disable_recursion_pending();
            continue;
        }
        if (it->is_regular_file(ec)) {
            files.emplace(fs::relative(it->path(), root, ec).generic_string(), it->path());
        }
    }
    return files;
}

struct FilePair {
    std::string path;
    std::optional<fs::path> before;  // absent for added files
    std::optional<fs::path> after;   // absent for deleted files
};

struct FileSetDiff {
    long AJF = 0, MJF = 0, DJF = 0, ANJF = 0, DNJF = 0, MNJF = 0;
    std::vector<FilePair> pairs_to_diff;     // JS files that differ, incl. added/deleted
    std::vector<FilePair> unchanged_js;      // JS files byte-identical on both sides
};

/// Path-keyed comparison of two snapshot directories.
[[nodiscard]] inline FileSetDiff diff_file_sets(const fs::path& before_root, const fs::path& after_root,
                                                Diagnostics& diag)
{
    const auto before = list_snapshot_files(before_root);
    const auto after = list_snapshot_files(after_root);
    FileSetDiff out;
    auto b = before.begin();
    auto a = after.begin();
    while (b != before.end() || a != after.end()) {
        if (a == after.end() || (b != before.end() && b->first < a->first)) {
            if (is_js_path(b->first)) {
                ++out.DJF;
                out.pairs_to_diff.push_back({b->first, b->second, std::nullopt});
            } else {
                ++out.DNJF;
            }
            ++b;
        } else if (b == before.end() || a->first < b->first) {
            if (is_js_path(a->first)) {
                ++out.AJF;
                out.pairs_to_diff.push_back({a->first, std::nullopt, a->second});
            } else {
                ++out.ANJF;
            }
            ++a;
        } else {
            const auto lhs = read_file(b->second);
            const auto rhs = read_file(a->second);
            if (!lhs || !rhs) {
                diag.warn("unreadable file skipped: " + b->first);
            } else if (*lhs != *rhs) {
                if (is_js_path(a->first)) {
                    ++out.MJF;
                    out.pairs_to_diff.push_back({a->first, b->second, a->second});
                } else {
                    ++out.MNJF;
                }
            } else if (is_js_path(a->first)) {
                out.unchanged_js.push_back({a->first, b->second, a->second});
            }
            ++b;
            ++a;
        }
    }
    return out;
}

struct LineChurn {
    long added = 0;
    long deleted = 0;
};

namespace detail {

inline std::vector<std::uint64_t> nonblank_line_hashes(std::string_view text)
{
    std::vector<std::uint64_t> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        const std::string_view line = text.substr(start, end - start);
        if (line.find_first_not_of(" \t\r\f\v") != std::string_view::npos) {
            lines.push_back(js::hash_bytes(line));
        }
        start = end + 1;
    }
    return lines;
}

// Myers' O((N+M)D) shortest edit script length (insertions + deletions).
inline long edit_distance(const std::vector<std::uint64_t>& x, const std::vector<std::uint64_t>& y)
{
    std::size_t lo = 0;
    while (lo < x.size() && lo < y.size() && x[lo] == y[lo]) {
        ++lo;
    }
    std::size_t hx = x.size();
    std::size_t hy = y.size();
    while (hx > lo && hy > lo && x[hx - 1] == y[hy - 1]) {
        --hx;
        --hy;
    }
    const long n = static_cast<long>(hx - lo);
    const long m = static_cast<long>(hy - lo);
    if (n == 0 || m == 0) {
        return n + m;
    }
    const long max = n + m;
    std::vector<long> v(static_cast<std::size_t>(2 * max + 2), 0);
    const long off = max;
    for (long d = 0; d <= max; ++d) {
        for (long k = -d; k <= d; k += 2) {
            long px;
            if (k == -d || (k != d && v[static_cast<std::size_t>(off + k - 1)] < v[static_cast<std::size_t>(off + k + 1)])) {
                px = v[static_cast<std::size_t>(off + k + 1)];
            } else {
                px = v[static_cast<std::size_t>(off + k - 1)] + 1;
            }
            long py = px - k;
            while (px < n && py < m && x[lo + static_cast<std::size_t>(px)] == y[lo + static_cast<std::size_t>(py)]) {
                ++px;
                ++py;
            }
            v[static_cast<std::size_t>(off + k)] = px;
            if (px >= n && py >= m) {
                return d;
            }
        }
    }
    return max;
}

}  // namespace detail

/// Lines added/deleted between two file versions, counting non-blank lines
/// only (the same rule as lines of code).
[[nodiscard]] inline LineChurn line_churn(std::string_view before, std::string_view after)
{
    const auto x = detail::nonblank_line_hashes(before);
    const auto y = detail::nonblank_line_hashes(after);
    const long d = detail::edit_distance(x, y);
    const long common = (static_cast<long>(x.size()) + static_cast<long>(y.size()) - d) / 2;
    return {static_cast<long>(y.size()) - common, static_cast<long>(x.size()) - common};
}

}  // namespace semverml::diff
