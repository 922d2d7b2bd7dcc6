#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "semverml/error.hpp"
#include "semverml/timeutil.hpp"

namespace semverml::mining {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

enum class FileStatus { Added, Modified, Deleted, Renamed };

[[nodiscard]] inline std::string_view to_string(FileStatus s) noexcept
{
    switch (s) {
    case FileStatus::Added: return "added";
    case FileStatus::Modified: return "modified";
    case FileStatus::Deleted: return "deleted";
    case FileStatus::Renamed: return "renamed";
    }
    return "modified";
}

[[nodiscard]] inline std::optional<FileStatus> parse_file_status(std::string_view s) noexcept
{
    if (s == "added" || s == "A") return FileStatus::Added;
    if (s == "modified" || s == "M") return FileStatus::Modified;
    if (s == "deleted" || s == "D") return FileStatus::Deleted;
    if (s == "renamed" || (!s.empty() && s.front() == 'R')) return FileStatus::Renamed;
    if (!s.empty() && (s.front() == 'C' || s.front() == 'T')) return FileStatus::Modified;
    return std::nullopt;
}

struct FileChange {
    std::string path;
    FileStatus status = FileStatus::Modified;
};

struct CommitRecord {
    std::string id;
    std::string author_id;
    Instant ts;
    std::string message;
    std::vector<FileChange> files;
};

enum class EventKind { IssueOpened, IssueClosed, PROpened, PRClosed };

[[nodiscard]] inline std::string_view to_string(EventKind k) noexcept
{
    switch (k) {
    case EventKind::IssueOpened: return "issue_opened";
    case EventKind::IssueClosed: return "issue_closed";
    case EventKind::PROpened: return "pr_opened";
    case EventKind::PRClosed: return "pr_closed";
    }
    return "issue_opened";
}

[[nodiscard]] inline std::optional<EventKind> parse_event_kind(std::string_view s) noexcept
{
    if (s == "issue_opened") return EventKind::IssueOpened;
    if (s == "issue_closed") return EventKind::IssueClosed;
    if (s == "pr_opened") return EventKind::PROpened;
    if (s == "pr_closed") return EventKind::PRClosed;
    return std::nullopt;
}

struct ActivityEvent {
    EventKind kind = EventKind::IssueOpened;
    Instant ts;
    std::string ref_id;
};

/// One row of releases.json.
struct ReleaseEntry {
    std::string version;
    std::optional<Instant> ts;
    std::string tree;
    bool skipped = false;
    std::string reason;
};

/// The canonical on-disk record set of one package.
struct Store {
    fs::path dir;
    std::string package;
    std::vector<ReleaseEntry> releases;
    std::vector<CommitRecord> commits;
    std::optional<std::vector<ActivityEvent>> events;

    /// Snapshot locations are stored relative to the store when materialized
    /// inside it.
    [[nodiscard]] fs::path resolve_tree(const std::string& tree) const
    {
        const fs::path p(tree);
        return p.is_absolute() ? p : dir / p;
    }
};

[[nodiscard]] inline std::string normalize_author(std::string_view email, std::string_view name)
{
    std::string out(email.empty() ? name : email);
    if (!email.empty()) {
        std::transform(out.begin(), out.end(), out.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    }
    return out;
}

// ------------------------------------------------------------------ encoding

[[nodiscard]] inline std::string encode_commit(const CommitRecord& c)
{
    ojson files = ojson::array();
    for (const auto& f : c.files) {
        files.push_back(ojson{{"path", f.path}, {"status", to_string(f.status)}});
    }
    const ojson j{{"id", c.id}, {"author_id", c.author_id}, {"ts", format_instant(c.ts)}, {"msg", c.message},
                  {"files", std::move(files)}};
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

[[nodiscard]] inline std::string encode_event(const ActivityEvent& e)
{
    const ojson j{{"kind", to_string(e.kind)}, {"ts", format_instant(e.ts)}, {"ref_id", e.ref_id}};
    return j.dump();
}

[[nodiscard]] inline std::string encode_releases(const std::string& package, const std::vector<ReleaseEntry>& rel)
{
    ojson arr = ojson::array();
    for (const auto& r : rel) {
        ojson o{{"version", r.version}, {"ts", r.ts ? format_instant(*r.ts) : std::string{}}, {"tree", r.tree}};
        if (r.skipped) {
            o["skipped"] = true;
            o["reason"] = r.reason;
        }
        arr.push_back(std::move(o));
    }
    const ojson j{{"package", package}, {"releases", std::move(arr)}};
    return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

// ------------------------------------------------------------------ decoding

namespace detail {

inline std::string get_string(const nlohmann::json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return {};
    }
    if (!it->is_string()) {
        throw Error(ErrorKind::MalformedMetadata, std::string("field '") + key + "' must be a string");
    }
    return it->get<std::string>();
}

}  // namespace detail

/// Decodes one commits.jsonl line. Also accepts raw exports carrying
/// author_email/author_name instead of a normalized author_id.
[[nodiscard]] inline CommitRecord decode_commit(std::string_view line)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedMetadata, std::string("commit line: ") + e.what());
    }
    if (!j.is_object()) {
        throw Error(ErrorKind::MalformedMetadata, "commit line is not an object");
    }
    CommitRecord c;
    c.id = detail::get_string(j, "id");
    c.author_id = detail::get_string(j, "author_id");
    if (c.author_id.empty()) {
        c.author_id = normalize_author(detail::get_string(j, "author_email"), detail::get_string(j, "author_name"));
    }
    const auto ts = parse_instant(detail::get_string(j, "ts"));
    if (c.id.empty() || !ts) {
        throw Error(ErrorKind::MalformedMetadata, "commit without id or valid ts: " + std::string(line.substr(0, 80)));
    }
    c.ts = *ts;
    c.message = detail::get_string(j, "msg");
    if (auto it = j.find("files"); it != j.end() && it->is_array()) {
        for (const auto& f : *it) {
            const auto status = parse_file_status(detail::get_string(f, "status"));
            c.files.push_back({detail::get_string(f, "path"), status.value_or(FileStatus::Modified)});
        }
    }
    return c;
}

[[nodiscard]] inline ActivityEvent decode_event(std::string_view line)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedMetadata, std::string("event line: ") + e.what());
    }
    const auto kind = parse_event_kind(detail::get_string(j, "kind"));
    const auto ts = parse_instant(detail::get_string(j, "ts"));
    if (!kind || !ts) {
        throw Error(ErrorKind::MalformedMetadata, "bad event: " + std::string(line.substr(0, 80)));
    }
    return {*kind, *ts, detail::get_string(j, "ref_id")};
}

template <typename Decode>
auto read_jsonl(const fs::path& path, Decode&& decode)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open " + path.string());
    }
    std::vector<decltype(decode(std::string_view{}))> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        out.push_back(decode(line));
    }
    return out;
}

inline void write_text(const fs::path& path, std::string_view content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot write " + path.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw Error(ErrorKind::Io, "write failed: " + path.string());
    }
}

[[nodiscard]] inline std::vector<ReleaseEntry> decode_releases(const nlohmann::json& j, std::string& package)
{
    if (!j.is_object() || !j.contains("releases") || !j["releases"].is_array()) {
        throw Error(ErrorKind::MalformedMetadata, "expected {\"package\", \"releases\": [...]}");
    }
    package = detail::get_string(j, "package");
    std::vector<ReleaseEntry> out;
    for (const auto& r : j["releases"]) {
        if (!r.is_object()) {
            throw Error(ErrorKind::MalformedMetadata, "release entry is not an object");
        }
        ReleaseEntry e;
        e.version = detail::get_string(r, "version");
        e.ts = parse_instant(detail::get_string(r, "ts"));
        e.tree = detail::get_string(r, "tree");
        e.skipped = r.value("skipped", false);
        e.reason = detail::get_string(r, "reason");
        out.push_back(std::move(e));
    }
    return out;
}

[[nodiscard]] inline nlohmann::json read_json_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::MalformedMetadata, "cannot open " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedMetadata, path.string() + ": " + e.what());
    }
}

/// Loads commits.jsonl, releases.json and (when present) events.jsonl.
[[nodiscard]] inline Store load_store(const fs::path& dir)
{
    Store s;
    s.dir = dir;
    if (!fs::exists(dir / "releases.json")) {
        throw Error(ErrorKind::MissingRepo, "no releases.json in store " + dir.string());
    }
    s.releases = decode_releases(read_json_file(dir / "releases.json"), s.package);
    if (fs::exists(dir / "commits.jsonl")) {
        s.commits = read_jsonl(dir / "commits.jsonl", decode_commit);
    }
    if (fs::exists(dir / "events.jsonl")) {
        s.events = read_jsonl(dir / "events.jsonl", decode_event);
    }
    return s;
}

}  // namespace semverml::mining
