// semverml: mine releases, extract features, train and evaluate release-type
// classifiers.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "semverml/error.hpp"
#include "semverml/features/dataset.hpp"
#include "semverml/features/extract.hpp"
#include "semverml/mining/miner.hpp"
#include "semverml/ml/evaluate.hpp"
#include "semverml/timeutil.hpp"

namespace fs = std::filesystem;
using namespace semverml;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct RunConfig {
    std::vector<std::string> stores;
    std::string dataset;
    std::string models;
    std::string reports;
    std::uint64_t seed = 0;
    std::size_t folds = 5;
    std::size_t repeats = 1;
    std::string algo = "all";
    std::string target = "all";
    std::string dimension = "all";
    std::string mode = "within";
    std::size_t smote_k = 5;
    double smote_ratio = 1.0;
    bool no_smote = false;
    std::size_t rf_trees = 100;
    std::size_t gbt_rounds = 100;

    // subcommand-specific
    std::string repo;
    std::string registry;
    std::string events;
    std::string since;
    std::string now;
};

Error input_error(const std::string& msg) { return Error(ErrorKind::InvalidArgument, msg); }

void print_warnings(const Diagnostics& d)
{
    for (const auto& w : d.warnings) std::cerr << "warning: " << w << '\n';
}

std::string fmt(const char* f, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::vector<ml::Algorithm> algorithms_of(const RunConfig& c)
{
    if (c.algo == "all") return {std::begin(ml::all_algorithms), std::end(ml::all_algorithms)};
    const auto a = ml::parse_algorithm(c.algo);
    if (!a) throw input_error("unknown algorithm " + c.algo);
    return {*a};
}

std::vector<ReleaseType> targets_of(const RunConfig& c)
{
    if (c.target == "all") return {ml::all_targets.begin(), ml::all_targets.end()};
    const auto t = parse_release_type(c.target);
    if (!t) throw input_error("unknown target " + c.target);
    return {*t};
}

std::vector<std::size_t> columns_of(const RunConfig& c)
{
    if (c.dimension == "all") return ml::all_columns();
    const auto d = features::parse_dimension(c.dimension);
    if (!d) throw input_error("unknown dimension " + c.dimension);
    return features::dimension_columns(*d);
}

ml::EvalOptions eval_options(const RunConfig& c)
{
    if (c.folds < 2) throw input_error("--folds must be at least 2");
    ml::EvalOptions o;
    o.folds = c.folds;
    o.repeats = std::max<std::size_t>(1, c.repeats);
    o.seed = c.seed;
    o.smote.k = c.smote_k;
    o.smote.target_ratio = c.smote_ratio;
    o.use_smote = !c.no_smote;
    o.params.rf.n_trees = c.rf_trees;
    o.params.gbt.n_rounds = c.gbt_rounds;
    return o;
}

std::string seed_line(const RunConfig& c)
{
    return "# seed=" + std::to_string(c.seed) + " folds=" + std::to_string(c.folds) + " repeats=" +
           std::to_string(std::max<std::size_t>(1, c.repeats)) + " smote=" + (c.no_smote ? "off" : "on") + "\n";
}

std::string require(const std::string& value, const char* flag)
{
    if (value.empty()) throw input_error(std::string(flag) + " is required");
    return value;
}

std::string cell(const std::optional<double>& v) { return v ? features::format_number(*v) : std::string(); }

// ------------------------------------------------------------------ ingest / label / extract

int cmd_ingest(const RunConfig& c)
{
    mining::IngestOptions opts;
    if (!c.events.empty()) opts.events_path = c.events;
    Diagnostics diag;
    if (c.stores.size() != 1) throw input_error("ingest writes exactly one --store");
    const auto s = mining::ingest_repo(require(c.repo, "--repo"), require(c.registry, "--registry"), c.stores[0],
                                       opts, diag);
    print_warnings(diag);
    std::size_t skipped = 0;
    for (const auto& r : s.releases) skipped += r.skipped ? 1 : 0;
    std::cout << s.package << ": " << s.commits.size() << " commits, " << s.releases.size() << " releases ("
              << skipped << " skipped)\n";
    return 0;
}

int cmd_label(const RunConfig& c)
{
    if (c.stores.empty()) throw input_error("--store is required");
    std::printf("%-24s %8s %8s %8s %8s\n", "package", "releases", "%Major", "%Minor", "%Patch");
    std::array<double, 3> sum{};
    std::size_t counted = 0;
    for (const auto& dir : c.stores) {
        const auto store = mining::load_store(dir);
        Diagnostics diag;
        const auto tl = mining::build_release_timeline(store, diag);
        print_warnings(diag);
        std::array<std::size_t, 3> n{};
        for (const auto& iv : tl) ++n[static_cast<std::size_t>(iv.label)];
        std::array<double, 3> pct{};
        for (std::size_t i = 0; i < 3; ++i) {
            pct[i] = 100.0 * static_cast<double>(n[i]) / static_cast<double>(tl.size());
            sum[i] += pct[i];
        }
        ++counted;
        std::printf("%-24s %8zu %8.1f %8.1f %8.1f\n", store.package.c_str(), tl.size(), pct[0], pct[1], pct[2]);
    }
    if (counted > 1) {
        const double k = static_cast<double>(counted);
        std::printf("%-24s %8s %8.1f %8.1f %8.1f\n", "Mean", "", sum[0] / k, sum[1] / k, sum[2] / k);
    }
    return 0;
}

std::uint64_t hash_file(std::uint64_t h, const fs::path& p)
{
    const auto text = diff::read_file(p);
    if (!text) return h;
    for (unsigned char ch : *text) h = (h ^ ch) * js::kFnvPrime;
    return h;
}

std::string utc_now()
{
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::system_clock::now().time_since_epoch())
                        .count();
    return format_instant(Instant{ms});
}

int cmd_extract(const RunConfig& c)
{
    if (c.stores.empty()) throw input_error("--store is required");
    const fs::path out = require(c.dataset, "--dataset");
    features::Dataset all;
    std::uint64_t h = js::kFnvOffset;
    for (const auto& dir : c.stores) {
        const auto store = mining::load_store(dir);
        for (const char* f : {"commits.jsonl", "releases.json", "events.jsonl"}) h = hash_file(h, fs::path(dir) / f);
        Diagnostics diag;
        const auto ds = features::extract_dataset(store, diag);
        print_warnings(diag);
        for (const auto& r : ds.rows) all.add(r);
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    all.provenance = {kToolVersion, hex, utc_now(), c.seed};
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    features::write_dataset(all, out);
    std::cout << all.rows.size() << " rows from " << c.stores.size() << " store(s) -> " << out.string() << '\n';
    return 0;
}

// ------------------------------------------------------------------ train

fs::path model_path(const fs::path& dir, ReleaseType t, ml::Algorithm a)
{
    return dir / (std::string(to_string(t)) + "-" + std::string(to_string(a)) + ".json");
}

int cmd_train(const RunConfig& c)
{
    const auto ds = features::read_dataset(require(c.dataset, "--dataset"));
    const fs::path dir = require(c.models, "--models");
    fs::create_directories(dir);
    const auto opts = eval_options(c);
    const auto cols = columns_of(c);
    Diagnostics diag;
    for (auto t : targets_of(c)) {
        const auto bin = ml::make_binary(ds, t, cols);
        if (!bin.both_classes()) {
            throw Error(ErrorKind::SingleClassInput, "dataset has no " + std::string(to_string(t)) + " contrast");
        }
        const auto fitted = opts.use_smote ? ml::smote(bin, opts.smote, mix_seed(c.seed, 1), &diag) : bin;
        for (auto a : algorithms_of(c)) {
            const auto m = ml::train(a, fitted, opts.params, mix_seed(c.seed, 2));
            ml::save_model(m, model_path(dir, t, a));
            std::cout << "trained " << to_string(t) << "-" << to_string(a) << " on " << fitted.rows() << " rows\n";
        }
    }
    print_warnings(diag);
    return 0;
}

// ------------------------------------------------------------------ evaluate

struct Grid {
    std::vector<ReleaseType> targets;
    std::vector<ml::Algorithm> algos;
};

std::string grid_header(const std::string& lead, const Grid& g)
{
    std::string h = lead;
    for (auto t : g.targets) {
        for (auto a : g.algos) h += "," + std::string(to_string(t)) + "_" + std::string(to_string(a));
    }
    return h + "\n";
}

void write_report(const fs::path& p, const std::string& text)
{
    fs::create_directories(p.parent_path());
    mining::write_text(p, text);
}

int eval_within(const RunConfig& c, const features::Dataset& ds, const fs::path& dir)
{
    const Grid g{targets_of(c), algorithms_of(c)};
    const auto opts = eval_options(c);
    const auto cols = columns_of(c);
    std::string table = seed_line(c) + grid_header("package", g);
    std::string detail = seed_line(c) + "package,target,algorithm,mean_auc,defined_folds,undefined_folds\n";
    // per (target, algorithm): per-package means, for the statistics
    std::map<std::pair<ReleaseType, ml::Algorithm>, std::vector<double>> means;
    Diagnostics diag;
    for (const auto& pkg : ds.packages) {
        const auto sub = ds.subset(pkg);
        table += features::detail::csv_field(pkg);
        for (auto t : g.targets) {
            const auto bin = ml::make_binary(sub, t, cols);
            for (auto a : g.algos) {
                const auto r = ml::evaluate_binary(bin, a, opts, &diag);
                const auto m = r.mean_auc();
                table += "," + cell(m);
                detail += features::detail::csv_field(pkg) + "," + std::string(to_string(t)) + "," +
                          std::string(to_string(a)) + "," + cell(m) + "," + std::to_string(r.defined_aucs().size()) +
                          "," + std::to_string(r.undefined()) + "\n";
                if (m) means[{t, a}].push_back(*m);
            }
        }
        table += "\n";
    }
    print_warnings(diag);
    write_report(dir / "within.csv", table);
    write_report(dir / "within_detail.csv", detail);

    std::string stats = seed_line(c) + "algorithm,target,p_value,delta,magnitude\n";
    for (auto t : g.targets) {
        const auto base = means.find({t, ml::Algorithm::ZeroR});
        for (auto a : g.algos) {
            if (a == ml::Algorithm::ZeroR) continue;
            const auto it = means.find({t, a});
            if (base == means.end() || it == means.end()) continue;
            const auto mw = ml::mann_whitney(it->second, base->second);
            const auto cd = ml::cliffs_delta(it->second, base->second);
            stats += std::string(to_string(a)) + "," + std::string(to_string(t)) + "," +
                     features::format_number(mw.p) + "," + features::format_number(cd.d) + "," +
                     std::string(to_string(cd.magnitude)) + "\n";
        }
    }
    write_report(dir / "stats.csv", stats);
    std::cout << "wrote " << (dir / "within.csv").string() << " and " << (dir / "stats.csv").string() << '\n';
    return 0;
}

int eval_dimension(const RunConfig& c, const features::Dataset& ds, const fs::path& dir)
{
    const Grid g{targets_of(c), algorithms_of(c)};
    std::vector<features::Dimension> dims(features::all_dimensions.begin(), features::all_dimensions.end());
    if (c.dimension != "all") {
        const auto d = features::parse_dimension(c.dimension);
        if (!d) throw input_error("unknown dimension " + c.dimension);
        dims = {*d};
    }
    const auto opts = eval_options(c);
    std::string out = seed_line(c) + "package,target,dimension";
    for (auto a : g.algos) out += "," + std::string(to_string(a));
    out += "\n";
    Diagnostics diag;
    for (const auto& pkg : ds.packages) {
        const auto sub = ds.subset(pkg);
        for (auto t : g.targets) {
            for (auto d : dims) {
                out += features::detail::csv_field(pkg) + "," + std::string(to_string(t)) + "," +
                       std::string(to_string(d));
                const auto bin = ml::make_binary(sub, t, features::dimension_columns(d));
                for (auto a : g.algos) out += "," + cell(ml::evaluate_binary(bin, a, opts, &diag).mean_auc());
                out += "\n";
            }
        }
    }
    print_warnings(diag);
    write_report(dir / "dimension.csv", out);
    std::cout << "wrote " << (dir / "dimension.csv").string() << '\n';
    return 0;
}

int eval_cross(const RunConfig& c, const features::Dataset& ds, const fs::path& dir)
{
    const Grid g{targets_of(c), algorithms_of(c)};
    const auto opts = eval_options(c);
    const auto pkgs = ml::split_by_package(ds);
    if (pkgs.size() < 2) throw input_error("cross mode needs at least two packages");
    // (target, algo) -> outcomes per held-out package
    std::map<std::pair<ReleaseType, ml::Algorithm>, std::vector<ml::CrossOutcome>> res;
    Diagnostics diag;
    std::size_t leaked = 0;
    for (auto t : g.targets) {
        for (auto a : g.algos) {
            res[{t, a}] = ml::evaluate_cross(pkgs, a, t, opts, &diag);
            for (const auto& o : res[{t, a}]) leaked += o.outcome.leaked;
        }
    }
    print_warnings(diag);
    if (leaked != 0) {
        throw Error(ErrorKind::IncompleteInputs, "held-out rows found in training pools");
    }
    std::string out = seed_line(c) + grid_header("package", g);
    for (std::size_t p = 0; p < pkgs.size(); ++p) {
        out += features::detail::csv_field(res.begin()->second[p].package);
        for (auto t : g.targets) {
            for (auto a : g.algos) out += "," + cell(res[{t, a}][p].outcome.auc);
        }
        out += "\n";
    }
    write_report(dir / "cross.csv", out);
    std::cout << "wrote " << (dir / "cross.csv").string() << '\n';
    return 0;
}

int cmd_evaluate(const RunConfig& c)
{
    const auto ds = features::read_dataset(require(c.dataset, "--dataset"));
    const fs::path dir = require(c.reports, "--reports");
    if (ds.rows.empty()) throw Error(ErrorKind::SchemaMismatch, "dataset has no rows");
    if (c.mode == "within") return eval_within(c, ds, dir);
    if (c.mode == "dimension") return eval_dimension(c, ds, dir);
    if (c.mode == "cross") return eval_cross(c, ds, dir);
    throw input_error("unknown mode " + c.mode);
}

// ------------------------------------------------------------------ report

struct CsvTable {
    std::string comment;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const fs::path& p)
{
    const auto text = diff::read_file(p);
    if (!text) throw Error(ErrorKind::Io, "no evaluation output at " + p.string());
    CsvTable t;
    std::istringstream in(*text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            t.comment = line;
        } else if (t.header.empty()) {
            t.header = features::detail::csv_split(line);
        } else {
            t.rows.push_back(features::detail::csv_split(line));
        }
    }
    if (t.header.empty()) throw Error(ErrorKind::SchemaMismatch, "empty report " + p.string());
    return t;
}

std::optional<double> number(const std::string& s)
{
    if (s.empty()) return std::nullopt;
    return std::strtod(s.c_str(), nullptr);
}

// Package rows plus Average / Median / Relative ROC-AUC summary rows.
std::string render_grid(const CsvTable& t)
{
    const std::size_t cols = t.header.size() - 1;
    std::string out;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-18s", t.header[0].c_str());
    out += buf;
    for (std::size_t j = 1; j <= cols; ++j) {
        std::snprintf(buf, sizeof buf, " %12s", t.header[j].c_str());
        out += buf;
    }
    out += "\n";
    std::vector<std::vector<double>> by_col(cols);
    for (const auto& r : t.rows) {
        std::snprintf(buf, sizeof buf, "%-18s", r.at(0).c_str());
        out += buf;
        for (std::size_t j = 1; j <= cols; ++j) {
            const auto v = j < r.size() ? number(r[j]) : std::nullopt;
            if (v) by_col[j - 1].push_back(*v);
            std::snprintf(buf, sizeof buf, " %12s", v ? fmt("%.3f", *v).c_str() : "n/a");
            out += buf;
        }
        out += "\n";
    }
    std::vector<std::optional<double>> avg(cols);
    for (const char* name : {"Average", "Median"}) {
        std::snprintf(buf, sizeof buf, "%-18s", name);
        out += buf;
        for (std::size_t j = 0; j < cols; ++j) {
            std::optional<double> v;
            if (!by_col[j].empty()) v = name[0] == 'A' ? ml::mean_of(by_col[j]) : ml::median_of(by_col[j]);
            if (name[0] == 'A') avg[j] = v;
            std::snprintf(buf, sizeof buf, " %12s", v ? fmt("%.3f", *v).c_str() : "n/a");
            out += buf;
        }
        out += "\n";
    }
    // relative to the zeror column of the same target
    std::snprintf(buf, sizeof buf, "%-18s", "Relative ROC-AUC");
    out += buf;
    for (std::size_t j = 0; j < cols; ++j) {
        const std::string& h = t.header[j + 1];
        const std::string target = h.substr(0, h.find('_'));
        std::optional<double> base;
        for (std::size_t k = 0; k < cols; ++k) {
            if (t.header[k + 1] == target + "_zeror") base = avg[k];
        }
        std::string s = "n/a";
        if (base && avg[j] && *base != 0.0) s = fmt("%.2fX", ml::relative_auc(*avg[j], *base));
        std::snprintf(buf, sizeof buf, " %12s", s.c_str());
        out += buf;
    }
    return out + "\n";
}

std::string render_dimension(const CsvTable& t)
{
    // average over packages per (target, dimension)
    std::map<std::pair<std::string, std::string>, std::vector<std::vector<double>>> acc;
    std::vector<std::pair<std::string, std::string>> order;
    const std::size_t algos = t.header.size() - 3;
    for (const auto& r : t.rows) {
        const auto key = std::make_pair(r.at(1), r.at(2));
        auto& v = acc[key];
        if (v.empty()) {
            v.resize(algos);
            order.push_back(key);
        }
        for (std::size_t j = 0; j < algos; ++j) {
            if (auto x = 3 + j < r.size() ? number(r[3 + j]) : std::nullopt) v[j].push_back(*x);
        }
    }
    std::string out;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-8s %-12s", "target", "dimension");
    out += buf;
    for (std::size_t j = 0; j < algos; ++j) {
        std::snprintf(buf, sizeof buf, " %8s", t.header[3 + j].c_str());
        out += buf;
    }
    out += "\n";
    for (const auto& key : order) {
        std::snprintf(buf, sizeof buf, "%-8s %-12s", key.first.c_str(), key.second.c_str());
        out += buf;
        for (const auto& v : acc[key]) {
            std::snprintf(buf, sizeof buf, " %8s", v.empty() ? "n/a" : fmt("%.3f", ml::mean_of(v)).c_str());
            out += buf;
        }
        out += "\n";
    }
    return out;
}

int cmd_report(const RunConfig& c)
{
    const fs::path dir = require(c.reports, "--reports");
    const fs::path src = dir / (c.mode + ".csv");
    if (c.mode != "within" && c.mode != "dimension" && c.mode != "cross") throw input_error("unknown mode " + c.mode);
    const auto t = read_csv(src);
    std::string text = t.comment.empty() ? std::string() : t.comment + "\n";
    text += c.mode == "dimension" ? render_dimension(t) : render_grid(t);
    if (c.mode == "within" && fs::exists(dir / "stats.csv")) {
        const auto s = read_csv(dir / "stats.csv");
        text += "\nalgorithm target   p_value    delta magnitude\n";
        for (const auto& r : s.rows) {
            if (r.size() < 5) continue;
            char buf[128];
            std::snprintf(buf, sizeof buf, "%-9s %-7s %9.4f %8.3f %s\n", r[0].c_str(), r[1].c_str(),
                          number(r[2]).value_or(1.0), number(r[3]).value_or(0.0), r[4].c_str());
            text += buf;
        }
    }
    mining::write_text(dir / (c.mode + "_report.txt"), text);
    std::cout << text;
    return 0;
}

// ------------------------------------------------------------------ predict

int cmd_predict(const RunConfig& c)
{
    const fs::path dir = require(c.models, "--models");
    const auto algos = algorithms_of(c);
    const ml::Algorithm algo = c.algo == "all" ? ml::Algorithm::GBT : algos.front();
    std::array<ml::TrainedModel, 3> models;
    for (std::size_t i = 0; i < 3; ++i) models[i] = ml::load_model(model_path(dir, ml::all_targets[i], algo));

    if (c.stores.size() != 1) throw input_error("predict reads exactly one --store");
    const auto store = mining::load_store(c.stores[0]);
    const mining::ReleaseEntry* prior = nullptr;
    for (const auto& r : store.releases) {
        if (r.skipped || !r.ts) continue;
        if (c.since.empty() ? (prior == nullptr || *prior->ts <= *r.ts) : r.version == c.since) prior = &r;
    }
    if (prior == nullptr) {
        throw Error(ErrorKind::NoPriorRelease,
                    c.since.empty() ? "store has no usable release" : "release " + c.since + " not in store");
    }
    const fs::path repo = require(c.repo, "--repo");
    if (!fs::is_directory(repo)) throw Error(ErrorKind::MissingRepo, "working tree not found: " + repo.string());

    mining::ReleaseInterval iv;
    iv.package = store.package;
    iv.prev_version = parse_version(prior->version);
    iv.version = iv.prev_version;
    iv.version.raw = "working-tree";
    iv.prev_publish_time = *prior->ts;
    if (c.now.empty()) {
        iv.publish_time = *parse_instant(utc_now());
    } else if (auto t = parse_instant(c.now)) {
        iv.publish_time = *t;
    } else {
        throw input_error("--now must be an ISO-8601 UTC instant");
    }
    iv.tree_before = store.resolve_tree(prior->tree);
    iv.tree_after = repo;
    const auto commits = mining::detail::is_git_repo(repo) ? mining::read_git_log(repo) : store.commits;
    for (const auto& cm : commits) {
        if (iv.in_window(cm.ts)) iv.commits.push_back(cm);
    }
    Diagnostics diag;
    const auto fv = features::extract_features(iv, store.events ? &*store.events : nullptr, diag);
    bool changed = false;
    for (auto j : features::dimension_columns(features::Dimension::ChangeType)) changed = changed || fv.values[j] != 0;
    if (!changed) diag.warn("no structural change since " + prior->version + "; change-type features are all zero");
    print_warnings(diag);

    const auto p = ml::ovr_predict({&models[0], &models[1], &models[2]}, fv);
    for (std::size_t i = 0; i < 3; ++i) std::printf("%-6s %.4f\n", to_string(ml::all_targets[i]).data(), p.scores[i]);
    std::printf("suggested: %s%s\n", to_string(p.type).data(), p.tie ? " (tie)" : "");
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Release-type prediction for npm packages"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key=value configuration file; flags take precedence");

    RunConfig c;
    app.add_option("--store", c.stores, "Canonical store directory (repeatable)");
    app.add_option("--dataset", c.dataset, "Dataset CSV path");
    app.add_option("--models", c.models, "Model directory");
    app.add_option("--reports", c.reports, "Report directory");
    app.add_option("--seed", c.seed, "Master seed")->envname("SEMVERML_SEED");
    app.add_option("--folds", c.folds, "Cross-validation folds")->check(CLI::Range(2, 1000));
    app.add_option("--repeats", c.repeats, "Passes of k-fold cross-validation")->check(CLI::Range(1, 1000));
    app.add_option("--algo", c.algo, "xgb, rf, dt, lr, zeror or all");
    app.add_option("--target", c.target, "major, minor, patch or all");
    app.add_option("--dimension", c.dimension, "Feature dimension or all");
    app.add_option("--mode", c.mode, "within, dimension or cross");
    app.add_option("--smote-k", c.smote_k, "SMOTE neighbours")->check(CLI::PositiveNumber);
    app.add_option("--smote-ratio", c.smote_ratio, "Minority/majority ratio after SMOTE");
    app.add_flag("--no-smote", c.no_smote, "Train on unresampled folds");
    app.add_option("--rf-trees", c.rf_trees, "Random forest size");
    app.add_option("--gbt-rounds", c.gbt_rounds, "Boosting rounds");

    auto* ingest = app.add_subcommand("ingest", "Re-encode a repository and registry metadata into a store");
    ingest->add_option("--repo", c.repo, "Git clone or exported commits.jsonl");
    ingest->add_option("--registry", c.registry, "Registry metadata JSON");
    ingest->add_option("--events", c.events, "Issue/PR activity export (JSONL)");
    app.add_subcommand("label", "Print the labeled release timeline summary");
    app.add_subcommand("extract", "Write the feature dataset CSV");
    app.add_subcommand("train", "Train one-vs-rest models on the whole dataset");
    app.add_subcommand("evaluate", "Cross-validate and write report CSVs");
    app.add_subcommand("report", "Render report tables");
    auto* predict = app.add_subcommand("predict", "Suggest the type of the next release");
    predict->add_option("--repo", c.repo, "Working tree");
    predict->add_option("--since", c.since, "Last released version (default: latest in store)");
    predict->add_option("--now", c.now, "Publish instant of the pseudo release (default: current time)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        (void)app.exit(e);
        return 2;
    }

    const std::map<std::string, int (*)(const RunConfig&)> commands = {
        {"ingest", cmd_ingest}, {"label", cmd_label},       {"extract", cmd_extract}, {"train", cmd_train},
        {"evaluate", cmd_evaluate}, {"report", cmd_report}, {"predict", cmd_predict}};
    try {
        return commands.at(app.get_subcommands().front()->get_name())(c);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.is_input_error() ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
