#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "semverml/js/ast.hpp"

namespace semverml::diff {

/// The twenty fine-grained change counters of one file pair or one release.
struct ChangeTypeCounts {
    long AJF = 0, MJF = 0, DJF = 0, ANJF = 0, DNJF = 0, MNJF = 0;
    long ADM = 0, DEM = 0, MOM = 0, MNC = 0, MPC = 0, MPD = 0;
    long MLA = 0, MLM = 0, MLD = 0;
    long GVA = 0, GVD = 0;
    long ICC = 0, DCC = 0, MCC = 0;

    static constexpr std::size_t kSize = 20;

    struct Field {
        std::string_view name;
        long ChangeTypeCounts::*member;
    };

    static constexpr std::array<Field, kSize> fields()
    {
        using C = ChangeTypeCounts;
        return {{{"AJF", &C::AJF}, {"MJF", &C::MJF}, {"DJF", &C::DJF}, {"ANJF", &C::ANJF}, {"DNJF", &C::DNJF},
                 {"MNJF", &C::MNJF}, {"ADM", &C::ADM}, {"DEM", &C::DEM}, {"MOM", &C::MOM}, {"MNC", &C::MNC},
                 {"MPC", &C::MPC}, {"MPD", &C::MPD}, {"MLA", &C::MLA}, {"MLM", &C::MLM}, {"MLD", &C::MLD},
                 {"GVA", &C::GVA}, {"GVD", &C::GVD}, {"ICC", &C::ICC}, {"DCC", &C::DCC}, {"MCC", &C::MCC}}};
    }

    ChangeTypeCounts& operator+=(const ChangeTypeCounts& other)
    {
        for (const auto& f : fields()) {
            this->*f.member += other.*f.member;
        }
        return *this;
    }

    friend bool operator==(const ChangeTypeCounts&, const ChangeTypeCounts&) = default;
};

/// Index-based view of a JsAst used by the matcher.
struct FlatNode {
    const js::Node* node = nullptr;
    long parent = -1;
    std::vector<std::size_t> children;
    std::size_t descendants = 0;  // excluding the node itself
    std::uint64_t struct_hash = 0;
    long function = -1;  // nearest enclosing function-kind ancestor
    std::size_t preorder = 0;
};

class FlatTree {
public:
    FlatTree() = default;

    explicit FlatTree(const js::JsAst& ast) { add(ast.root, -1, -1); }
    FlatTree(js::JsAst&&) = delete;  // keeps pointers into the AST

    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] bool empty() const noexcept { return nodes_.empty(); }
    [[nodiscard]] const FlatNode& operator[](std::size_t i) const { return nodes_[i]; }
    [[nodiscard]] const js::Node& node(std::size_t i) const { return *nodes_[i].node; }
    [[nodiscard]] js::NodeKind kind(std::size_t i) const { return nodes_[i].node->kind; }

    [[nodiscard]] bool is_ancestor(std::size_t anc, std::size_t i) const
    {
        return i > anc && i <= anc + nodes_[anc].descendants;
    }

private:
    std::vector<FlatNode> nodes_;

    std::size_t add(const js::Node& n, long parent, long function)
    {
        const std::size_t idx = nodes_.size();
        nodes_.push_back({});
        nodes_[idx].node = &n;
        nodes_[idx].parent = parent;
        nodes_[idx].function = function;
        nodes_[idx].preorder = idx;
        const long child_function = js::is_function(n.kind) ? static_cast<long>(idx) : function;
        std::uint64_t h = js::kFnvOffset;
        auto mix = [&h](std::uint64_t v) {
            for (int b = 0; b < 8; ++b) {
                h = (h ^ ((v >> (8 * b)) & 0xFF)) * js::kFnvPrime;
            }
        };
        mix(static_cast<std::uint64_t>(n.kind));
        mix(n.text_hash);
        mix(n.name ? js::hash_bytes(*n.name) : 0);
        std::vector<std::size_t> kids;
        kids.reserve(n.children.size());
        for (const auto& c : n.children) {
            const std::size_t k = add(c, static_cast<long>(idx), child_function);
            kids.push_back(k);
            mix(nodes_[k].struct_hash);
        }
        nodes_[idx].children = std::move(kids);
        nodes_[idx].descendants = nodes_.size() - idx - 1;
        nodes_[idx].struct_hash = h;
        return idx;
    }
};

struct TreeMapping {
    static constexpr long kNone = -1;

    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // sorted by before index
    std::vector<std::size_t> unmatched_before;
    std::vector<std::size_t> unmatched_after;
    std::vector<long> before_to_after;
    std::vector<long> after_to_before;

    [[nodiscard]] bool matched_before(std::size_t i) const { return before_to_after[i] != kNone; }
    [[nodiscard]] bool matched_after(std::size_t i) const { return after_to_before[i] != kNone; }
};

struct MatchOptions {
    double min_dice = 0.5;
};

namespace detail {

inline std::size_t span_distance(const FlatTree& a, std::size_t i, const FlatTree& b, std::size_t j)
{
    const auto la = a.node(i).span.start_line;
    const auto lb = b.node(j).span.start_line;
    return la > lb ? la - lb : lb - la;
}

class Matcher {
public:
    Matcher(const FlatTree& before, const FlatTree& after, MatchOptions options)
        : b_(before), a_(after), opts_(options), b2a_(before.size(), TreeMapping::kNone),
          a2b_(after.size(), TreeMapping::kNone)
    {
    }

    TreeMapping run()
    {
        if (!b_.empty() && !a_.empty()) {
            anchor_phase();
            if (!matched_b(0) && !matched_a(0) && b_.kind(0) == a_.kind(0)) {
                link(0, 0);
            }
            container_phase();
            recovery_phase();
        }
        TreeMapping m;
        for (std::size_t i = 0; i < b_.size(); ++i) {
            if (b2a_[i] != TreeMapping::kNone) {
                m.pairs.emplace_back(i, static_cast<std::size_t>(b2a_[i]));
            } else {
                m.unmatched_before.push_back(i);
            }
        }
        for (std::size_t j = 0; j < a_.size(); ++j) {
            if (a2b_[j] == TreeMapping::kNone) {
                m.unmatched_after.push_back(j);
            }
        }
        m.before_to_after = std::move(b2a_);
        m.after_to_before = std::move(a2b_);
        return m;
    }

private:
    const FlatTree& b_;
    const FlatTree& a_;
    MatchOptions opts_;
    std::vector<long> b2a_;
    std::vector<long> a2b_;

    [[nodiscard]] bool matched_b(std::size_t i) const { return b2a_[i] != TreeMapping::kNone; }
    [[nodiscard]] bool matched_a(std::size_t j) const { return a2b_[j] != TreeMapping::kNone; }

    void link(std::size_t i, std::size_t j)
    {
        b2a_[i] = static_cast<long>(j);
        a2b_[j] = static_cast<long>(i);
    }

    // Maps two isomorphic subtrees node by node.
    void link_subtree(std::size_t i, std::size_t j)
    {
        link(i, j);
        const auto& bc = b_[i].children;
        const auto& ac = a_[j].children;
        for (std::size_t k = 0; k < std::min(bc.size(), ac.size()); ++k) {
            if (!matched_b(bc[k]) && !matched_a(ac[k]) && b_.kind(bc[k]) == a_.kind(ac[k])) {
                link_subtree(bc[k], ac[k]);
            }
        }
    }

    [[nodiscard]] bool isomorphic(std::size_t i, std::size_t j) const
    {
        return b_[i].struct_hash == a_[j].struct_hash && b_[i].descendants == a_[j].descendants &&
               b_.kind(i) == a_.kind(j);
    }

    // Phase 1: identical subtrees, largest first.
    void anchor_phase()
    {
        struct Group {
            std::vector<std::size_t> before;
            std::vector<std::size_t> after;
        };
        std::map<std::pair<std::size_t, std::uint64_t>, Group, std::greater<>> groups;
        for (std::size_t i = 0; i < b_.size(); ++i) {
            groups[{b_[i].descendants, b_[i].struct_hash}].before.push_back(i);
        }
        for (std::size_t j = 0; j < a_.size(); ++j) {
            auto it = groups.find({a_[j].descendants, a_[j].struct_hash});
            if (it != groups.end()) {
                it->second.after.push_back(j);
            }
        }
        for (auto& [key, group] : groups) {
            if (group.after.empty()) {
                continue;
            }
            std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> cands;
            for (auto i : group.before) {
                if (matched_b(i)) continue;
                for (auto j : group.after) {
                    if (matched_a(j) || !isomorphic(i, j)) continue;
                    cands.emplace_back(span_distance(b_, i, a_, j), i + j, i, j);
                }
            }
            std::sort(cands.begin(), cands.end());
            for (const auto& [dist, sum, i, j] : cands) {
                if (!matched_b(i) && !matched_a(j)) {
                    link_subtree(i, j);
                }
            }
        }
    }

    [[nodiscard]] double dice(std::size_t i, std::size_t j) const
    {
        const std::size_t total = b_[i].descendants + a_[j].descendants;
        if (total == 0) {
            return 0.0;
        }
        std::size_t common = 0;
        for (std::size_t d = i + 1; d <= i + b_[i].descendants; ++d) {
            if (matched_b(d) && a_.is_ancestor(j, static_cast<std::size_t>(b2a_[d]))) {
                ++common;
            }
        }
        return 2.0 * static_cast<double>(common) / static_cast<double>(total);
    }

    // Phase 2: containers whose descendants are mostly mapped to each other.
    // Candidate pairs are taken greedily by (dice desc, span distance, source
    // order) and re-evaluated until no new pair qualifies.
    void container_phase()
    {
        while (true) {
            struct Cand {
                double dice;
                std::size_t dist;
                std::size_t order;
                std::size_t i;
                std::size_t j;
            };
            std::vector<Cand> cands;
            for (std::size_t i = 0; i < b_.size(); ++i) {
                if (matched_b(i) || b_[i].descendants == 0) {
                    continue;
                }
                std::vector<std::size_t> seen;
                for (std::size_t d = i + 1; d <= i + b_[i].descendants; ++d) {
                    if (!matched_b(d)) continue;
                    for (long anc = a_[static_cast<std::size_t>(b2a_[d])].parent; anc >= 0;
                         anc = a_[static_cast<std::size_t>(anc)].parent) {
                        const auto j = static_cast<std::size_t>(anc);
                        if (matched_a(j) || a_.kind(j) != b_.kind(i)) continue;
                        if (std::find(seen.begin(), seen.end(), j) != seen.end()) continue;
                        seen.push_back(j);
                        const double dc = dice(i, j);
                        if (dc >= opts_.min_dice) {
                            cands.push_back({dc, span_distance(b_, i, a_, j), i + j, i, j});
                        }
                    }
                }
            }
            if (cands.empty()) {
                return;
            }
            std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
                return std::tie(y.dice, x.dist, x.order, x.i) < std::tie(x.dice, y.dist, y.order, y.i);
            });
            bool added = false;
            for (const auto& c : cands) {
                if (!matched_b(c.i) && !matched_a(c.j)) {
                    link(c.i, c.j);
                    added = true;
                }
            }
            if (!added) {
                return;
            }
        }
    }

    template <typename Key>
    void lcs_children(const std::vector<std::size_t>& bs, const std::vector<std::size_t>& as, Key&& key,
                      bool whole_subtree)
    {
        const std::size_t n = bs.size();
        const std::size_t m = as.size();
        if (n == 0 || m == 0) {
            return;
        }
        std::vector<std::vector<std::size_t>> len(n + 1, std::vector<std::size_t>(m + 1, 0));
        for (std::size_t x = n; x-- > 0;) {
            for (std::size_t y = m; y-- > 0;) {
                len[x][y] = key(bs[x], true) == key(as[y], false) ? len[x + 1][y + 1] + 1
                                                                  : std::max(len[x + 1][y], len[x][y + 1]);
            }
        }
        std::size_t x = 0, y = 0;
        while (x < n && y < m) {
            if (key(bs[x], true) == key(as[y], false) && len[x][y] == len[x + 1][y + 1] + 1) {
                if (whole_subtree && isomorphic(bs[x], as[y])) {
                    link_subtree(bs[x], as[y]);
                } else {
                    link(bs[x], as[y]);
                }
                ++x;
                ++y;
            } else if (len[x + 1][y] >= len[x][y + 1]) {
                ++x;
            } else {
                ++y;
            }
        }
    }

    // Recovery: inside every mapped pair, align still-unmapped children first
    // by identical subtree, then by (kind, name).
    void recovery_phase()
    {
        std::deque<std::pair<std::size_t, std::size_t>> queue;
        for (std::size_t i = 0; i < b_.size(); ++i) {
            if (matched_b(i)) {
                queue.emplace_back(i, static_cast<std::size_t>(b2a_[i]));
            }
        }
        while (!queue.empty()) {
            const auto [i, j] = queue.front();
            queue.pop_front();
            auto unmatched_b_kids = [&] {
                std::vector<std::size_t> out;
                for (auto c : b_[i].children) {
                    if (!matched_b(c)) out.push_back(c);
                }
                return out;
            };
            auto unmatched_a_kids = [&] {
                std::vector<std::size_t> out;
                for (auto c : a_[j].children) {
                    if (!matched_a(c)) out.push_back(c);
                }
                return out;
            };
            auto bs = unmatched_b_kids();
            auto as = unmatched_a_kids();
            if (bs.empty() || as.empty()) {
                continue;
            }
            lcs_children(
                bs, as,
                [&](std::size_t k, bool before_side) { return before_side ? b_[k].struct_hash : a_[k].struct_hash; },
                true);
            bs = unmatched_b_kids();
            as = unmatched_a_kids();
            lcs_children(
                bs, as,
                [&](std::size_t k, bool before_side) {
                    const js::Node& n = before_side ? b_.node(k) : a_.node(k);
                    return std::make_pair(n.kind, n.name.value_or(std::string{}));
                },
                false);
            for (auto c : b_[i].children) {
                if (matched_b(c)) {
                    const auto partner = static_cast<std::size_t>(b2a_[c]);
                    if (a_[partner].parent == static_cast<long>(j) && !b_[c].children.empty()) {
                        queue.emplace_back(c, partner);
                    }
                }
            }
        }
    }
};

// Marks the members of one longest strictly increasing subsequence.
inline std::vector<bool> lis_members(const std::vector<std::size_t>& seq)
{
    const std::size_t n = seq.size();
    std::vector<std::size_t> tails;
    std::vector<long> tail_idx;
    std::vector<long> prev(n, -1);
    for (std::size_t k = 0; k < n; ++k) {
        auto it = std::lower_bound(tails.begin(), tails.end(), seq[k]);
        const auto pos = static_cast<std::size_t>(it - tails.begin());
        if (it == tails.end()) {
            tails.push_back(seq[k]);
            tail_idx.push_back(static_cast<long>(k));
        } else {
            *it = seq[k];
            tail_idx[pos] = static_cast<long>(k);
        }
        prev[k] = pos > 0 ? tail_idx[pos - 1] : -1;
    }
    std::vector<bool> in(n, false);
    for (long k = tail_idx.empty() ? -1 : tail_idx.back(); k >= 0; k = prev[static_cast<std::size_t>(k)]) {
        in[static_cast<std::size_t>(k)] = true;
    }
    return in;
}

inline std::vector<std::string> param_names(const FlatTree& t, std::size_t fn)
{
    std::vector<std::string> names;
    for (auto c : t[fn].children) {
        if (t.kind(c) == js::NodeKind::Param) {
            names.push_back(t.node(c).name.value_or(std::string{}));
        }
    }
    return names;
}

}  // namespace detail

/// Hash-anchored top-down matching followed by dice-driven container matching
/// and child-alignment recovery.
[[nodiscard]] inline TreeMapping match_trees(const FlatTree& before, const FlatTree& after, MatchOptions options = {})
{
    return detail::Matcher(before, after, options).run();
}

/// Counts the method/logic/global/comment change types of one file pair.
/// File-level counters (AJF..MNJF) are left at zero.
[[nodiscard]] inline ChangeTypeCounts classify_changes(const TreeMapping& m, const FlatTree& before,
                                                       const FlatTree& after)
{
    using js::NodeKind;
    ChangeTypeCounts c;
    auto function_matched_b = [&](std::size_t i) {
        const long f = before[i].function;
        return f >= 0 && m.matched_before(static_cast<std::size_t>(f));
    };
    auto function_matched_a = [&](std::size_t j) {
        const long f = after[j].function;
        return f >= 0 && m.matched_after(static_cast<std::size_t>(f));
    };

    for (auto i : m.unmatched_before) {
        const auto k = before.kind(i);
        if (js::is_function(k)) ++c.DEM;
        if (k == NodeKind::Statement && function_matched_b(i)) ++c.MLD;
        if (k == NodeKind::VarDecl && before[i].parent == 0) ++c.GVD;
        if (k == NodeKind::Comment) ++c.DCC;
    }
    for (auto j : m.unmatched_after) {
        const auto k = after.kind(j);
        if (js::is_function(k)) ++c.ADM;
        if (k == NodeKind::Statement && function_matched_a(j)) ++c.MLA;
        if (k == NodeKind::VarDecl && after[j].parent == 0) ++c.GVA;
        if (k == NodeKind::Comment) ++c.ICC;
    }

    // Statements whose relative order among mapped siblings changed.
    std::vector<bool> reordered(before.size(), false);
    for (const auto& [pb, pa] : m.pairs) {
        std::vector<std::size_t> kids;
        std::vector<std::size_t> partner_pos;
        const auto& after_kids = after[pa].children;
        for (auto ch : before[pb].children) {
            if (before.kind(ch) != NodeKind::Statement || !m.matched_before(ch)) continue;
            const auto partner = static_cast<std::size_t>(m.before_to_after[ch]);
            if (after[partner].parent != static_cast<long>(pa)) continue;
            kids.push_back(ch);
            partner_pos.push_back(static_cast<std::size_t>(
                std::find(after_kids.begin(), after_kids.end(), partner) - after_kids.begin()));
        }
        const auto keep = detail::lis_members(partner_pos);
        for (std::size_t k = 0; k < kids.size(); ++k) {
            if (!keep[k]) reordered[kids[k]] = true;
        }
    }

    for (const auto& [i, j] : m.pairs) {
        const auto k = before.kind(i);
        const long pb = before[i].parent;
        const long pa = after[j].parent;
        const bool same_parent = pb < 0 ? pa < 0 : (pa >= 0 && m.before_to_after[static_cast<std::size_t>(pb)] == pa);
        if (js::is_function(k)) {
            // rename and move are independent counters
            if (!same_parent) ++c.MOM;
            if (before.node(i).name != after.node(j).name) ++c.MNC;
            const auto pn_before = detail::param_names(before, i);
            const auto pn_after = detail::param_names(after, j);
            if (pn_after.size() < pn_before.size()) {
                ++c.MPD;
            } else if (pn_after.size() > pn_before.size() || pn_after != pn_before) {
                ++c.MPC;
            }
        } else if (k == NodeKind::Statement && function_matched_b(i)) {
            if (!same_parent || reordered[i]) ++c.MLM;
        } else if (k == NodeKind::Comment) {
            if (before.node(i).text_hash != after.node(j).text_hash) ++c.MCC;
        }
    }
    return c;
}

[[nodiscard]] inline ChangeTypeCounts diff_asts(const js::JsAst& before, const js::JsAst& after)
{
    const FlatTree fb(before);
    const FlatTree fa(after);
    return classify_changes(match_trees(fb, fa), fb, fa);
}

}  // namespace semverml::diff
