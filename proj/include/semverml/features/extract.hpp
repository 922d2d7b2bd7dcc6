#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semverml/diff/snapshot.hpp"
#include "semverml/diff/tree_diff.hpp"
#include "semverml/error.hpp"
#include "semverml/features/dataset.hpp"
#include "semverml/js/metrics.hpp"
#include "semverml/js/parser.hpp"
#include "semverml/mining/miner.hpp"

namespace semverml::features {

/// Structural comparison of two snapshot directories.
struct SnapshotComparison {
    diff::ChangeTypeCounts change;
    SnapshotMetrics before;
    SnapshotMetrics after;
    diff::LineChurn churn;
};

namespace detail {

struct ParsedFile {
    std::string source;
    js::JsAst ast;
};

inline std::optional<ParsedFile> load_js(const fs::path& p, Diagnostics& diag)
{
    auto src = diff::read_file(p);
    if (!src) {
        diag.warn("unreadable file skipped: " + p.string());
        return std::nullopt;
    }
    ParsedFile f{std::move(*src), {}};
    f.ast = js::parse_js(f.source);
    return f;
}

inline void accumulate(SnapshotMetrics& m, const ParsedFile& f)
{
    const auto fm = js::file_metrics(f.ast, f.source);
    m.loc += fm.loc;
    m.function_count += fm.function_count;
    m.cyclomatic_total += fm.cyclomatic_total;
}

}  // namespace detail

[[nodiscard]] inline SnapshotComparison compare_snapshots(const fs::path& before_root, const fs::path& after_root,
                                                          Diagnostics& diag)
{
    SnapshotComparison out;
    const auto files = diff::diff_file_sets(before_root, after_root, diag);
    auto& c = out.change;
    c.AJF = files.AJF;
    c.MJF = files.MJF;
    c.DJF = files.DJF;
    c.ANJF = files.ANJF;
    c.DNJF = files.DNJF;
    c.MNJF = files.MNJF;

    // byte-identical files contribute the same metrics to both sides
    for (const auto& pair : files.unchanged_js) {
        if (auto f = detail::load_js(*pair.after, diag)) {
            detail::accumulate(out.before, *f);
            detail::accumulate(out.after, *f);
        }
    }
    for (const auto& pair : files.pairs_to_diff) {
        std::optional<detail::ParsedFile> b;
        std::optional<detail::ParsedFile> a;
        if (pair.before) {
            b = detail::load_js(*pair.before, diag);
            if (!b) continue;
        }
        if (pair.after) {
            a = detail::load_js(*pair.after, diag);
            if (!a) continue;
        }
        const diff::FlatTree fb = b ? diff::FlatTree(b->ast) : diff::FlatTree();
        const diff::FlatTree fa = a ? diff::FlatTree(a->ast) : diff::FlatTree();
        c += diff::classify_changes(diff::match_trees(fb, fa), fb, fa);
        const auto churn = diff::line_churn(b ? std::string_view(b->source) : std::string_view{},
                                            a ? std::string_view(a->source) : std::string_view{});
        out.churn.added += churn.added;
        out.churn.deleted += churn.deleted;
        if (b) detail::accumulate(out.before, *b);
        if (a) detail::accumulate(out.after, *a);
    }
    return out;
}

/// Computes the full 41-feature vector of one release interval.
[[nodiscard]] inline FeatureVector extract_features(const mining::ReleaseInterval& iv,
                                                    const std::vector<mining::ActivityEvent>* events,
                                                    Diagnostics& diag)
{
    const auto cmp = compare_snapshots(iv.tree_before, iv.tree_after, diag);
    const auto manifest_before = diff::read_file(iv.tree_before / mining::manifest_path);
    const auto manifest_after = diff::read_file(iv.tree_after / mining::manifest_path);
    auto as_view = [](const std::optional<std::string>& s) -> std::optional<std::string_view> {
        if (!s) return std::nullopt;
        return std::string_view(*s);
    };
    const auto dep = mining::dependency_features(iv, as_view(manifest_before), as_view(manifest_after), diag);
    const auto dev = mining::development_features(iv, events, diag);
    const auto text = mining::textual_features(iv);
    const auto cx = complexity_features(cmp.before, cmp.after, cmp.churn);
    return assemble(iv, cmp.change, dep, dev, text, cx, mining::time_feature(iv));
}

/// One row per labeled interval of the store.
[[nodiscard]] inline Dataset extract_dataset(const mining::Store& store, Diagnostics& diag)
{
    Dataset ds;
    std::vector<mining::ReleaseInterval> timeline;
    try {
        timeline = mining::build_release_timeline(store, diag);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::EmptyTimeline) throw;
        diag.warn(e.what());
        return ds;
    }
    const auto* events = store.events ? &*store.events : nullptr;
    bool warned = false;
    for (const auto& iv : timeline) {
        Diagnostics local;
        ds.add(extract_features(iv, events, local));
        for (auto& w : local.warnings) {
            // the missing-events warning repeats for every interval
            if (events == nullptr && w.starts_with("no activity events")) {
                if (warned) continue;
                warned = true;
            }
            diag.warn(std::move(w));
        }
    }
    return ds;
}

}  // namespace semverml::features
