#pragma once

// Writes raw ingest inputs (commits.jsonl, registry.json, one JS snapshot per
// release) for a synthetic package. Majors delete exported functions, minors
// add functions, patches edit a body.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "semverml/rng.hpp"
#include "semverml/semver.hpp"
#include "tempdir.hpp"

namespace testutil {

struct PackageInputs {
    std::filesystem::path commits;
    std::filesystem::path registry;
};

struct Fn {
    std::string name;
    int params = 1;
    int stmts = 1;
};

inline std::string render_snapshot(const std::vector<Fn>& fns)
{
    std::string s = "var VERSION = 1;\n";
    for (const auto& f : fns) {
        s += "function " + f.name + "(";
        for (int p = 0; p < f.params; ++p) s += (p ? ", a" : "a") + std::to_string(p);
        s += ") {\n  var t = 0;\n";
        for (int k = 0; k < f.stmts; ++k) {
            s += "  if (t > " + std::to_string(k) + ") { t = t + " + std::to_string(k) + "; }\n";
        }
        s += "  return t;\n}\n";
    }
    return s;
}

inline std::string iso_day(int day)
{
    // days after 2020-01-01, fine for the few hundred days used here
    static const int month_days[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int y = 2020, m = 0, d = day;
    while (true) {
        const int len = month_days[m] - ((m == 1 && y % 4 != 0) ? 1 : 0);
        if (d < len) break;
        d -= len;
        if (++m == 12) {
            m = 0;
            ++y;
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT12:00:00Z", y, m + 1, d + 1);
    return buf;
}

/// `labels` gives the type of every release after the first (1.0.0).
inline PackageInputs write_package(const TempDir& tmp, const std::string& name,
                                   const std::vector<semverml::ReleaseType>& labels, std::uint64_t seed)
{
    using semverml::ReleaseType;
    semverml::Rng rng(seed);
    std::vector<Fn> fns;
    int next_fn = 0;
    for (int i = 0; i < 4; ++i) fns.push_back({"f" + std::to_string(next_fn++), 1, 1});

    int major = 1, minor = 0, patch = 0;
    int day = 0;
    std::string commits;
    std::string releases;
    int commit_no = 0;
    const auto release = [&](const std::string& msg_kind) {
        const std::string v = std::to_string(major) + "." + std::to_string(minor) + "." + std::to_string(patch);
        const std::string rel = name + "/snap/" + v;
        tmp.write(rel + "/index.js", render_snapshot(fns));
        tmp.write(rel + "/README.md", "# " + name + " " + v + "\n");
        const int n = 1 + static_cast<int>(rng.below(4));
        for (int c = 0; c < n; ++c) {
            ++day;
            commits += R"({"id":"c)" + std::to_string(commit_no++) + R"(","author_id":"dev)" +
                       std::to_string(rng.below(3)) + R"(@x.org","ts":")" + iso_day(day) + R"(","msg":")" + msg_kind +
                       R"( change","files":[{"path":"index.js","status":"modified"}]})" + "\n";
        }
        day += 1 + static_cast<int>(rng.below(5));
        if (!releases.empty()) releases += ",\n";
        releases += R"({"version":")" + v + R"(","ts":")" + iso_day(day) + R"(","tree":"snap/)" + v + R"("})";
    };
    release("initial");
    for (auto t : labels) {
        if (t == ReleaseType::Major) {
            ++major;
            minor = patch = 0;
            if (fns.size() > 2) fns.erase(fns.begin() + static_cast<long>(rng.below(fns.size())));
            fns.front().params += 1;
            release("breaking");
        } else if (t == ReleaseType::Minor) {
            ++minor;
            patch = 0;
            fns.push_back({"f" + std::to_string(next_fn++), 1 + static_cast<int>(rng.below(2)), 1});
            release("feat");
        } else {
            ++patch;
            fns[rng.below(fns.size())].stmts += 1;
            release("fix");
        }
    }
    return {tmp.write(name + "/commits.jsonl", commits),
            tmp.write(name + "/registry.json", R"({"package":")" + name + R"(","releases":[)" + releases + "]}\n")};
}

inline std::vector<semverml::ReleaseType> random_labels(std::size_t n, std::uint64_t seed)
{
    semverml::Rng rng(seed);
    std::vector<semverml::ReleaseType> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        out.push_back(u < 0.15 ? semverml::ReleaseType::Major
                               : (u < 0.45 ? semverml::ReleaseType::Minor : semverml::ReleaseType::Patch));
    }
    return out;
}

}  // namespace testutil
