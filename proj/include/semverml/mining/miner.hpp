#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <initializer_list>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "semverml/error.hpp"
#include "semverml/mining/store.hpp"
#include "semverml/semver.hpp"
#include "semverml/timeutil.hpp"

namespace semverml::mining {

// ------------------------------------------------------------------ process

namespace detail {

inline std::string shell_quote(std::string_view s)
{
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    out += '\'';
    return out;
}

struct ProcessResult {
    int status = -1;
    std::string out;
};

inline ProcessResult run_capture(const std::string& cmd)
{
    ProcessResult r;
    FILE* p = ::popen(cmd.c_str(), "r");
    if (p == nullptr) {
        return r;
    }
    std::array<char, 8192> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) {
        r.out.append(buf.data(), n);
    }
    r.status = ::pclose(p);
    return r;
}

inline bool is_git_repo(const fs::path& p)
{
    std::error_code ec;
    if (!fs::is_directory(p, ec)) {
        return false;
    }
    const auto r = run_capture("git -C " + shell_quote(p.string()) + " rev-parse --git-dir 2>/dev/null");
    return r.status == 0;
}

inline std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Mainline history of a git clone, oldest first.
[[nodiscard]] inline std::vector<CommitRecord> read_git_log(const fs::path& repo)
{
    const std::string cmd = "git -C " + detail::shell_quote(repo.string()) +
                            " -c core.quotepath=off log --first-parent --reverse --diff-merges=first-parent"
                            " --name-status --no-renames --format='%x1e%H%x1f%ae%x1f%an%x1f%cI%x1f%B%x1f' HEAD"
                            " 2>/dev/null";
    const auto r = detail::run_capture(cmd);
    if (r.status != 0) {
        // An empty repository has no HEAD; treat as no history.
        const auto head = detail::run_capture("git -C " + detail::shell_quote(repo.string()) +
                                              " rev-parse --verify -q HEAD 2>/dev/null");
        if (head.status != 0) {
            return {};
        }
        throw Error(ErrorKind::MissingRepo, "git log failed in " + repo.string());
    }
    std::vector<CommitRecord> out;
    for (auto rec : detail::split(r.out, '\x1e')) {
        if (detail::trim(rec).empty()) {
            continue;
        }
        const auto f = detail::split(rec, '\x1f');
        if (f.size() < 6) {
            throw Error(ErrorKind::MissingRepo, "unexpected git log record");
        }
        CommitRecord c;
        c.id = std::string(f[0]);
        c.author_id = normalize_author(f[1], f[2]);
        const auto ts = parse_instant(f[3]);
        if (!ts) {
            throw Error(ErrorKind::MissingRepo, "unparseable commit date " + std::string(f[3]));
        }
        c.ts = *ts;
        c.message = std::string(detail::trim(f[4]));
        for (auto line : detail::split(f[5], '\n')) {
            line = detail::trim(line);
            if (line.empty()) {
                continue;
            }
            const auto cols = detail::split(line, '\t');
            if (cols.size() < 2) {
                continue;
            }
            const auto status = parse_file_status(cols[0]).value_or(FileStatus::Modified);
            c.files.push_back({std::string(cols.back()), status});
        }
        out.push_back(std::move(c));
    }
    return out;
}

struct IngestOptions {
    std::optional<fs::path> events_path;
};

namespace detail {

inline bool is_archive(std::string_view p)
{
    return p.ends_with(".tar") || p.ends_with(".tar.gz") || p.ends_with(".tgz");
}

// Materializes a snapshot locator; returns the stored tree string or nullopt.
inline std::optional<std::string> materialize(const std::string& locator, const std::string& version,
                                              const std::optional<fs::path>& git_repo, const fs::path& meta_dir,
                                              const fs::path& out_dir, std::string& reason)
{
    const fs::path rel = fs::path("trees") / version;
    const fs::path dest = out_dir / rel;
    std::error_code ec;
    if (locator.starts_with("git:")) {
        if (!git_repo) {
            reason = "git locator without a git repository";
            return std::nullopt;
        }
        fs::remove_all(dest, ec);
        fs::create_directories(dest, ec);
        const std::string cmd = "git -C " + shell_quote(git_repo->string()) + " archive --format=tar " +
                                shell_quote(locator.substr(4)) + " 2>/dev/null | tar -x -C " +
                                shell_quote(dest.string()) + " 2>/dev/null";
        if (std::system(cmd.c_str()) != 0 || fs::is_empty(dest, ec)) {
            fs::remove_all(dest, ec);
            reason = "cannot materialize " + locator;
            return std::nullopt;
        }
        return rel.generic_string();
    }
    fs::path src(locator);
    if (src.is_relative()) {
        src = meta_dir / src;
    }
    if (locator.empty() || !fs::exists(src, ec)) {
        reason = "snapshot not found: " + locator;
        return std::nullopt;
    }
    if (is_archive(locator) && fs::is_regular_file(src, ec)) {
        fs::remove_all(dest, ec);
        fs::create_directories(dest, ec);
        const std::string cmd =
            "tar -xf " + shell_quote(src.string()) + " -C " + shell_quote(dest.string()) + " 2>/dev/null";
        if (std::system(cmd.c_str()) != 0) {
            fs::remove_all(dest, ec);
            reason = "cannot extract " + locator;
            return std::nullopt;
        }
        return rel.generic_string();
    }
    if (!fs::is_directory(src, ec)) {
        reason = "snapshot is not a directory: " + locator;
        return std::nullopt;
    }
    return fs::absolute(src, ec).lexically_normal().generic_string();
}

}  // namespace detail

/// Re-encodes a repository (git clone or exported commits JSONL) plus registry
/// metadata into the canonical store under `out_dir`.
inline Store ingest_repo(const fs::path& repo_path, const fs::path& registry_metadata_path, const fs::path& out_dir,
                         const IngestOptions& opts, Diagnostics& diag)
{
    std::error_code ec;
    if (!fs::exists(repo_path, ec)) {
        throw Error(ErrorKind::MissingRepo, "repository not found: " + repo_path.string());
    }
    std::optional<fs::path> git_repo;
    Store s;
    s.dir = out_dir;
    if (fs::is_directory(repo_path, ec)) {
        if (!detail::is_git_repo(repo_path)) {
            throw Error(ErrorKind::MissingRepo, "not a git repository: " + repo_path.string());
        }
        git_repo = repo_path;
        s.commits = read_git_log(repo_path);
    } else {
        s.commits = read_jsonl(repo_path, decode_commit);
    }
    std::stable_sort(s.commits.begin(), s.commits.end(),
                     [](const CommitRecord& a, const CommitRecord& b) { return a.ts < b.ts; });
    std::set<std::string> ids;
    for (const auto& c : s.commits) {
        if (!ids.insert(c.id).second) {
            throw Error(ErrorKind::MalformedMetadata, "duplicate commit id " + c.id);
        }
    }

    const auto meta = read_json_file(registry_metadata_path);
    s.releases = decode_releases(meta, s.package);
    if (s.package.empty()) {
        s.package = registry_metadata_path.stem().string();
    }
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw Error(ErrorKind::Io, "cannot create " + out_dir.string());
    }
    const fs::path meta_dir = registry_metadata_path.parent_path();
    std::set<std::string> seen_versions;
    for (auto& r : s.releases) {
        r.skipped = false;
        r.reason.clear();
        const auto v = try_parse_version(r.version);
        if (!v) {
            r.skipped = true;
            r.reason = "malformed version";
        } else if (!r.ts) {
            r.skipped = true;
            r.reason = "malformed publish time";
        } else if (!seen_versions.insert(r.version).second) {
            r.skipped = true;
            r.reason = "duplicate version";
        } else if (auto tree = detail::materialize(r.tree, r.version, git_repo, meta_dir, out_dir, r.reason)) {
            r.tree = *tree;
        } else {
            r.skipped = true;
        }
        if (r.skipped) {
            diag.warn("release " + r.version + " skipped: " + r.reason);
        }
    }
    // Publish order, precedence as the tie-break; undated entries last.
    std::stable_sort(s.releases.begin(), s.releases.end(), [](const ReleaseEntry& a, const ReleaseEntry& b) {
        if (a.ts.has_value() != b.ts.has_value()) {
            return a.ts.has_value();
        }
        if (!a.ts || *a.ts != *b.ts) {
            return a.ts && *a.ts < *b.ts;
        }
        const auto va = try_parse_version(a.version);
        const auto vb = try_parse_version(b.version);
        if (va && vb) {
            return compare(*va, *vb) < 0;
        }
        return false;
    });
    for (std::size_t i = 1; i < s.releases.size(); ++i) {
        const auto& a = s.releases[i - 1];
        const auto& b = s.releases[i];
        if (a.ts && b.ts && *a.ts == *b.ts) {
            diag.warn("releases " + a.version + " and " + b.version + " share a publish time; ordered by precedence");
        }
    }

    std::string commits_text;
    for (const auto& c : s.commits) {
        commits_text += encode_commit(c);
        commits_text += '\n';
    }
    write_text(out_dir / "commits.jsonl", commits_text);
    write_text(out_dir / "releases.json", encode_releases(s.package, s.releases));

    fs::remove(out_dir / "events.jsonl", ec);
    if (opts.events_path) {
        auto events = read_jsonl(*opts.events_path, decode_event);
        std::stable_sort(events.begin(), events.end(),
                         [](const ActivityEvent& a, const ActivityEvent& b) { return a.ts < b.ts; });
        std::string text;
        for (const auto& e : events) {
            text += encode_event(e);
            text += '\n';
        }
        write_text(out_dir / "events.jsonl", text);
        s.events = std::move(events);
    }
    return s;
}

// ------------------------------------------------------------------ timeline

struct ReleaseInterval {
    std::string package;
    VersionNumber version;
    VersionNumber prev_version;
    Instant publish_time;
    Instant prev_publish_time;
    ReleaseType label = ReleaseType::Patch;
    std::vector<CommitRecord> commits;
    fs::path tree_before;
    fs::path tree_after;

    [[nodiscard]] std::string release_id() const { return package + "@" + version.raw; }

    [[nodiscard]] bool in_window(Instant t) const noexcept { return prev_publish_time < t && t <= publish_time; }
};

/// Labels consecutive usable releases and attaches each interval's commits.
/// Backport/NoChange releases are dropped and do not become predecessors.
[[nodiscard]] inline std::vector<ReleaseInterval> build_release_timeline(const Store& store, Diagnostics& diag)
{
    struct Usable {
        VersionNumber v;
        Instant ts;
        fs::path tree;
    };
    std::vector<Usable> rel;
    for (const auto& r : store.releases) {
        if (r.skipped || !r.ts) {
            continue;
        }
        auto v = try_parse_version(r.version);
        if (!v) {
            diag.warn("release " + r.version + " ignored: malformed version");
            continue;
        }
        rel.push_back({std::move(*v), *r.ts, store.resolve_tree(r.tree)});
    }
    std::stable_sort(rel.begin(), rel.end(), [](const Usable& a, const Usable& b) {
        if (a.ts != b.ts) {
            return a.ts < b.ts;
        }
        return compare(a.v, b.v) < 0;
    });
    if (rel.size() < 2) {
        throw Error(ErrorKind::EmptyTimeline,
                    "package " + store.package + " has " + std::to_string(rel.size()) + " usable release(s)");
    }

    std::vector<const CommitRecord*> commits;
    commits.reserve(store.commits.size());
    for (const auto& c : store.commits) {
        commits.push_back(&c);
    }
    std::stable_sort(commits.begin(), commits.end(),
                     [](const CommitRecord* a, const CommitRecord* b) { return a->ts < b->ts; });

    std::vector<ReleaseInterval> out;
    std::size_t prev = 0;
    for (std::size_t i = 1; i < rel.size(); ++i) {
        const Transition t = label_transition(rel[prev].v, rel[i].v);
        const auto type = release_type_of(t);
        if (!type) {
            diag.warn("release " + rel[i].v.raw + " dropped as " + std::string(to_string(t)));
            continue;
        }
        ReleaseInterval iv;
        iv.package = store.package;
        iv.version = rel[i].v;
        iv.prev_version = rel[prev].v;
        iv.publish_time = rel[i].ts;
        iv.prev_publish_time = rel[prev].ts;
        iv.label = *type;
        iv.tree_before = rel[prev].tree;
        iv.tree_after = rel[i].tree;
        auto lo = std::upper_bound(commits.begin(), commits.end(), iv.prev_publish_time,
                                   [](Instant t0, const CommitRecord* c) { return t0 < c->ts; });
        auto hi = std::upper_bound(commits.begin(), commits.end(), iv.publish_time,
                                   [](Instant t0, const CommitRecord* c) { return t0 < c->ts; });
        for (auto it = lo; it < hi; ++it) {
            iv.commits.push_back(**it);
        }
        out.push_back(std::move(iv));
        prev = i;
    }
    return out;
}

// ------------------------------------------------------------------ features

struct DependencyFeatures {
    long TCPJ = 0, PA = 0, PD = 0, PU = 0;
};

namespace detail {

inline std::map<std::string, std::string> manifest_dependencies(std::optional<std::string_view> text,
                                                               std::string_view side, Diagnostics& diag)
{
    std::map<std::string, std::string> deps;
    if (!text) {
        return deps;
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(*text);
    } catch (const nlohmann::json::exception&) {
        diag.warn(std::string(to_string(ErrorKind::MalformedManifest)) + ": " + std::string(side) +
                  " manifest treated as empty");
        return deps;
    }
    if (!j.is_object()) {
        diag.warn(std::string(to_string(ErrorKind::MalformedManifest)) + ": " + std::string(side) +
                  " manifest treated as empty");
        return deps;
    }
    for (const char* section : {"dependencies", "devDependencies"}) {
        auto it = j.find(section);
        if (it == j.end() || !it->is_object()) {
            continue;
        }
        for (const auto& [name, spec] : it->items()) {
            deps[name] = spec.is_string() ? spec.get<std::string>() : spec.dump();
        }
    }
    return deps;
}

}  // namespace detail

inline constexpr std::string_view manifest_path = "package.json";

[[nodiscard]] inline DependencyFeatures dependency_features(const ReleaseInterval& iv,
                                                            std::optional<std::string_view> manifest_before,
                                                            std::optional<std::string_view> manifest_after,
                                                            Diagnostics& diag)
{
    DependencyFeatures f;
    for (const auto& c : iv.commits) {
        if (std::any_of(c.files.begin(), c.files.end(), [](const FileChange& fc) { return fc.path == manifest_path; })) {
            ++f.TCPJ;
        }
    }
    const auto before = detail::manifest_dependencies(manifest_before, "before", diag);
    const auto after = detail::manifest_dependencies(manifest_after, "after", diag);
    for (const auto& [name, spec] : after) {
        auto it = before.find(name);
        if (it == before.end()) {
            ++f.PA;
        } else if (it->second != spec) {
            ++f.PU;
        }
    }
    for (const auto& [name, spec] : before) {
        if (!after.count(name)) {
            ++f.PD;
        }
    }
    return f;
}

struct DevelopmentFeatures {
    long TCM = 0, TAU = 0, POI = 0, PCI = 0, PCPR = 0, POPR = 0;
};

/// `events` null means no activity export exists for the package.
[[nodiscard]] inline DevelopmentFeatures development_features(const ReleaseInterval& iv,
                                                              const std::vector<ActivityEvent>* events,
                                                              Diagnostics& diag)
{
    DevelopmentFeatures f;
    f.TCM = static_cast<long>(iv.commits.size());
    std::set<std::string> authors;
    for (const auto& c : iv.commits) {
        authors.insert(c.author_id);
    }
    f.TAU = static_cast<long>(authors.size());
    if (events == nullptr) {
        diag.warn("no activity events for " + iv.package + "; issue/PR counts are zero");
        return f;
    }
    for (const auto& e : *events) {
        if (!iv.in_window(e.ts)) {
            continue;
        }
        switch (e.kind) {
        case EventKind::IssueOpened: ++f.POI; break;
        case EventKind::IssueClosed: ++f.PCI; break;
        case EventKind::PRClosed: ++f.PCPR; break;
        case EventKind::PROpened: ++f.POPR; break;
        }
    }
    return f;
}

struct TextualFeatures {
    long NBF = 0, KWM = 0, KWP = 0, KWB = 0;
    double AML = 0.0;
};

namespace detail {

inline std::vector<std::string> words_of(std::string_view msg)
{
    std::vector<std::string> words;
    std::string cur;
    for (char ch : msg) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) != 0) {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            words.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) {
        words.push_back(std::move(cur));
    }
    return words;
}

inline bool is_variant(std::string_view word, std::string_view stem)
{
    if (!word.starts_with(stem)) {
        return false;
    }
    const auto rest = word.substr(stem.size());
    if (rest.empty() || rest == "s" || rest == "es" || rest == "ed" || rest == "ing") {
        return true;
    }
    // doubled final consonant: bugged, bugging
    if (!stem.empty() && rest.size() > 1 && rest.front() == stem.back()) {
        const auto r2 = rest.substr(1);
        return r2 == "ed" || r2 == "ing";
    }
    return false;
}

inline bool any_variant(const std::vector<std::string>& words, std::initializer_list<std::string_view> stems)
{
    for (const auto& w : words) {
        for (auto s : stems) {
            if (is_variant(w, s)) {
                return true;
            }
        }
    }
    return false;
}

inline std::size_t utf8_length(std::string_view s)
{
    std::size_t n = 0;
    for (char ch : s) {
        if ((static_cast<unsigned char>(ch) & 0xC0) != 0x80) {
            ++n;
        }
    }
    return n;
}

}  // namespace detail

[[nodiscard]] inline bool mentions_bug(std::string_view msg)
{
    const auto words = detail::words_of(msg);
    if (detail::any_variant(words, {"bug", "fix", "defect", "error", "issue"})) {
        return true;
    }
    return std::any_of(words.begin(), words.end(), [](const std::string& w) {
        return detail::is_variant(w, "bugfix") || detail::is_variant(w, "hotfix");
    });
}

[[nodiscard]] inline TextualFeatures textual_features(const ReleaseInterval& iv)
{
    TextualFeatures f;
    std::size_t total = 0;
    for (const auto& c : iv.commits) {
        const auto words = detail::words_of(c.message);
        f.NBF += mentions_bug(c.message) ? 1 : 0;
        f.KWM += detail::any_variant(words, {"major"}) ? 1 : 0;
        f.KWP += detail::any_variant(words, {"patch"}) ? 1 : 0;
        const bool brk = std::any_of(words.begin(), words.end(), [](const std::string& w) {
            return detail::is_variant(w, "break") || w == "breaks" || w == "breakage";
        });
        f.KWB += brk ? 1 : 0;
        total += detail::utf8_length(c.message);
    }
    if (!iv.commits.empty()) {
        f.AML = static_cast<double>(total) / static_cast<double>(iv.commits.size());
    }
    return f;
}

[[nodiscard]] inline double time_feature(const ReleaseInterval& iv)
{
    return std::max(0.0, days_between(iv.prev_publish_time, iv.publish_time));
}

}  // namespace semverml::mining
