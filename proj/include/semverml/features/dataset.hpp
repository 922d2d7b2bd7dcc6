#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "semverml/diff/snapshot.hpp"
#include "semverml/diff/tree_diff.hpp"
#include "semverml/error.hpp"
#include "semverml/mining/miner.hpp"
#include "semverml/semver.hpp"

namespace semverml::features {

namespace fs = std::filesystem;

inline constexpr std::size_t feature_count = 41;

inline constexpr std::array<std::string_view, feature_count> feature_names = {
    "AJF", "MJF", "DJF", "ANJF", "DNJF", "MNJF", "ADM", "DEM", "MOM", "MNC", "MPC", "MPD", "MLA", "MLM",
    "MLD", "GVA", "GVD", "ICC", "DCC", "MCC", "TCPJ", "PA", "PD", "PU", "ACYCD", "CLCJD", "CYCD", "LA",
    "LD", "RDTD", "TCM", "TAU", "POI", "PCI", "PCPR", "POPR", "NBF", "KWM", "KWP", "KWB", "AML"};

enum class Dimension { ChangeType, Dependency, Complexity, Time, Development, Textual };

inline constexpr std::array<Dimension, 6> all_dimensions = {Dimension::ChangeType,  Dimension::Dependency,
                                                            Dimension::Complexity,  Dimension::Time,
                                                            Dimension::Development, Dimension::Textual};

struct DimensionRange {
    std::size_t first;
    std::size_t count;
};

[[nodiscard]] constexpr DimensionRange dimension_range(Dimension d) noexcept
{
    switch (d) {
    case Dimension::ChangeType: return {0, 20};
    case Dimension::Dependency: return {20, 4};
    case Dimension::Complexity: return {24, 5};
    case Dimension::Time: return {29, 1};
    case Dimension::Development: return {30, 6};
    case Dimension::Textual: return {36, 5};
    }
    return {0, 0};
}

[[nodiscard]] constexpr std::string_view to_string(Dimension d) noexcept
{
    switch (d) {
    case Dimension::ChangeType: return "change_type";
    case Dimension::Dependency: return "dependency";
    case Dimension::Complexity: return "complexity";
    case Dimension::Time: return "time";
    case Dimension::Development: return "development";
    case Dimension::Textual: return "textual";
    }
    return "";
}

[[nodiscard]] inline std::optional<Dimension> parse_dimension(std::string_view s) noexcept
{
    for (auto d : all_dimensions) {
        if (to_string(d) == s) {
            return d;
        }
    }
    return std::nullopt;
}

[[nodiscard]] inline Dimension dimension_of(std::size_t feature) noexcept
{
    for (auto d : all_dimensions) {
        const auto r = dimension_range(d);
        if (feature >= r.first && feature < r.first + r.count) {
            return d;
        }
    }
    return Dimension::Textual;
}

[[nodiscard]] inline std::vector<std::size_t> dimension_columns(Dimension d)
{
    const auto r = dimension_range(d);
    std::vector<std::size_t> cols(r.count);
    for (std::size_t i = 0; i < r.count; ++i) {
        cols[i] = r.first + i;
    }
    return cols;
}

[[nodiscard]] inline std::optional<std::size_t> feature_index(std::string_view name) noexcept
{
    for (std::size_t i = 0; i < feature_count; ++i) {
        if (feature_names[i] == name) {
            return i;
        }
    }
    return std::nullopt;
}

struct FeatureVector {
    std::string release_id;
    std::string package;
    ReleaseType label = ReleaseType::Patch;
    std::array<double, feature_count> values{};

    [[nodiscard]] double operator[](std::string_view name) const { return values.at(feature_index(name).value()); }
    [[nodiscard]] double& operator[](std::string_view name) { return values.at(feature_index(name).value()); }

    bool operator==(const FeatureVector&) const = default;
};

struct ComplexityFeatures {
    double ACYCD = 0.0;
    long CLCJD = 0, CYCD = 0, LA = 0, LD = 0;
};

/// Totals over every JS file of one snapshot.
struct SnapshotMetrics {
    long loc = 0;
    long function_count = 0;
    long cyclomatic_total = 0;

    [[nodiscard]] double cyclomatic_avg() const noexcept
    {
        return static_cast<double>(cyclomatic_total) / static_cast<double>(std::max(1L, function_count));
    }
};

[[nodiscard]] inline ComplexityFeatures complexity_features(const SnapshotMetrics& before, const SnapshotMetrics& after,
                                                            const diff::LineChurn& churn)
{
    ComplexityFeatures f;
    f.ACYCD = after.cyclomatic_avg() - before.cyclomatic_avg();
    f.CYCD = after.cyclomatic_total - before.cyclomatic_total;
    f.CLCJD = after.loc - before.loc;
    f.LA = churn.added;
    f.LD = churn.deleted;
    return f;
}

/// Places every component record at its canonical position.
[[nodiscard]] inline FeatureVector assemble(const mining::ReleaseInterval& iv,
                                            const std::optional<diff::ChangeTypeCounts>& change,
                                            const std::optional<mining::DependencyFeatures>& dep,
                                            const std::optional<mining::DevelopmentFeatures>& dev,
                                            const std::optional<mining::TextualFeatures>& text,
                                            const std::optional<ComplexityFeatures>& cx,
                                            const std::optional<double>& rdtd)
{
    if (!change || !dep || !dev || !text || !cx || !rdtd) {
        throw Error(ErrorKind::IncompleteInputs, "missing feature component for " + iv.release_id());
    }
    FeatureVector fv;
    fv.release_id = iv.release_id();
    fv.package = iv.package;
    fv.label = iv.label;
    auto& v = fv.values;
    std::size_t i = 0;
    for (const auto& [name, member] : diff::ChangeTypeCounts::fields()) {
        v[i++] = static_cast<double>((*change).*member);
    }
    for (double x : {double(dep->TCPJ), double(dep->PA), double(dep->PD), double(dep->PU), cx->ACYCD,
                     double(cx->CLCJD), double(cx->CYCD), double(cx->LA), double(cx->LD), *rdtd, double(dev->TCM),
                     double(dev->TAU), double(dev->POI), double(dev->PCI), double(dev->PCPR), double(dev->POPR),
                     double(text->NBF), double(text->KWM), double(text->KWP), double(text->KWB), text->AML}) {
        v[i++] = x;
    }
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw Error(ErrorKind::IncompleteInputs, "non-finite feature in " + fv.release_id);
        }
    }
    return fv;
}

struct Provenance {
    std::string tool_version;
    std::string ingest_hash;
    std::string created_ts;
    std::optional<std::uint64_t> seed;
};

struct Dataset {
    std::vector<std::string> packages;
    std::vector<FeatureVector> rows;
    Provenance provenance;

    void add(FeatureVector fv)
    {
        if (!ids_.insert(fv.release_id).second) {
            throw Error(ErrorKind::SchemaMismatch, "duplicate release_id " + fv.release_id);
        }
        if (std::find(packages.begin(), packages.end(), fv.package) == packages.end()) {
            packages.push_back(fv.package);
        }
        rows.push_back(std::move(fv));
    }

    /// Rows of one package, original order preserved.
    [[nodiscard]] Dataset subset(std::string_view package) const
    {
        Dataset d;
        d.provenance = provenance;
        for (const auto& r : rows) {
            if (r.package == package) {
                d.add(r);
            }
        }
        return d;
    }

private:
    std::set<std::string> ids_;
};

// ------------------------------------------------------------------ CSV

namespace detail {

inline std::string csv_field(std::string_view s)
{
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) {
        return std::string(s);
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

inline std::vector<std::string> csv_split(std::string_view line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

}  // namespace detail

[[nodiscard]] inline std::string format_number(double x)
{
    if (x == 0.0) {
        return "0";  // no "-0"
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

[[nodiscard]] inline std::string csv_header()
{
    std::string h = "release_id,package,label";
    for (auto n : feature_names) {
        h += ',';
        h += n;
    }
    return h;
}

[[nodiscard]] inline std::string to_csv(const Dataset& ds)
{
    std::string out = csv_header() + "\n";
    for (const auto& r : ds.rows) {
        out += detail::csv_field(r.release_id);
        out += ',';
        out += detail::csv_field(r.package);
        out += ',';
        out += to_string(r.label);
        for (double x : r.values) {
            out += ',';
            out += format_number(x);
        }
        out += '\n';
    }
    return out;
}

[[nodiscard]] inline fs::path provenance_path(const fs::path& dataset_path)
{
    return fs::path(dataset_path.string() + ".provenance.json");
}

inline void write_dataset(const Dataset& ds, const fs::path& path)
{
    mining::write_text(path, to_csv(ds));
    nlohmann::ordered_json j{{"tool_version", ds.provenance.tool_version},
                             {"ingest_hash", ds.provenance.ingest_hash},
                             {"created_ts", ds.provenance.created_ts}};
    if (ds.provenance.seed) {
        j["seed"] = *ds.provenance.seed;
    }
    mining::write_text(provenance_path(path), j.dump(2) + "\n");
}

[[nodiscard]] inline Dataset parse_dataset(std::string_view text)
{
    Dataset ds;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    std::vector<std::size_t> column_of;  // csv column -> feature index
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }
        const auto cells = detail::csv_split(line);
        if (line_no++ == 0) {
            if (cells.size() < 3 || cells[0] != "release_id" || cells[1] != "package" || cells[2] != "label") {
                throw Error(ErrorKind::SchemaMismatch, "dataset header must start with release_id,package,label");
            }
            std::set<std::size_t> seen;
            for (std::size_t c = 3; c < cells.size(); ++c) {
                const auto idx = feature_index(cells[c]);
                if (!idx) {
                    throw Error(ErrorKind::SchemaMismatch, "unknown column " + cells[c]);
                }
                if (!seen.insert(*idx).second) {
                    throw Error(ErrorKind::SchemaMismatch, "duplicate column " + cells[c]);
                }
                column_of.push_back(*idx);
            }
            if (seen.size() != feature_count) {
                for (std::size_t i = 0; i < feature_count; ++i) {
                    if (!seen.count(i)) {
                        throw Error(ErrorKind::SchemaMismatch, "missing column " + std::string(feature_names[i]));
                    }
                }
            }
            continue;
        }
        if (cells.size() != column_of.size() + 3) {
            throw Error(ErrorKind::SchemaMismatch, "row " + std::to_string(line_no) + " has wrong column count");
        }
        FeatureVector fv;
        fv.release_id = cells[0];
        fv.package = cells[1];
        const auto label = parse_release_type(cells[2]);
        if (!label) {
            throw Error(ErrorKind::SchemaMismatch, "bad label '" + cells[2] + "'");
        }
        fv.label = *label;
        for (std::size_t c = 0; c < column_of.size(); ++c) {
            const std::string& cell = cells[c + 3];
            char* endp = nullptr;
            const double x = std::strtod(cell.c_str(), &endp);
            if (cell.empty() || endp != cell.c_str() + cell.size() || !std::isfinite(x)) {
                throw Error(ErrorKind::SchemaMismatch, "bad value '" + cell + "' in row " + std::to_string(line_no));
            }
            fv.values[column_of[c]] = x;
        }
        ds.add(std::move(fv));
    }
    if (line_no == 0) {
        throw Error(ErrorKind::SchemaMismatch, "dataset has no header");
    }
    return ds;
}

[[nodiscard]] inline Dataset read_dataset(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open dataset " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    Dataset ds = parse_dataset(ss.str());
    std::error_code ec;
    if (fs::exists(provenance_path(path), ec)) {
        try {
            const auto j = nlohmann::json::parse(std::ifstream(provenance_path(path)));
            ds.provenance.tool_version = j.value("tool_version", "");
            ds.provenance.ingest_hash = j.value("ingest_hash", "");
            ds.provenance.created_ts = j.value("created_ts", "");
            if (j.contains("seed") && j["seed"].is_number_unsigned()) {
                ds.provenance.seed = j["seed"].get<std::uint64_t>();
            }
        } catch (const nlohmann::json::exception&) {
            // sidecar is informational only
        }
    }
    return ds;
}

}  // namespace semverml::features
