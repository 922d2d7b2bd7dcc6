#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "semverml/js/ast.hpp"

namespace semverml::js {

struct FunctionComplexity {
    NodeKind kind = NodeKind::FunctionDecl;
    std::optional<std::string> name;
    std::size_t start_line = 0;
    int complexity = 1;
};

struct CyclomaticReport {
    std::vector<FunctionComplexity> functions;  // source (pre-)order
    long total = 0;
};

namespace detail {

inline int owned_decisions(const Node& node)
{
    int sum = node.decisions;
    for (const auto& child : node.children) {
        if (!is_function(child.kind)) {
            sum += owned_decisions(child);
        }
    }
    return sum;
}

inline void collect_complexity(const Node& node, CyclomaticReport& report)
{
    if (is_function(node.kind)) {
        const int value = 1 + owned_decisions(node);
        report.functions.push_back({node.kind, node.name, node.span.start_line, value});
        report.total += value;
    }
    for (const auto& child : node.children) {
        collect_complexity(child, report);
    }
}

}  // namespace detail

/// McCabe complexity per function: 1 + decision points (if, for, for-in/of,
/// while, do, case, catch, ?:, &&, ||) in its body, nested functions excluded.
[[nodiscard]] inline CyclomaticReport cyclomatic(const JsAst& ast)
{
    CyclomaticReport report;
    detail::collect_complexity(ast.root, report);
    return report;
}

struct CommentInfo {
    Span span;
    std::uint64_t text_hash = 0;
};

struct FileMetrics {
    long loc = 0;
    long function_count = 0;
    long cyclomatic_total = 0;
    double cyclomatic_avg = 0.0;
    std::set<std::string> global_var_names;
    std::vector<CommentInfo> comment_nodes;
};

/// Number of physical lines containing at least one non-whitespace character.
[[nodiscard]] inline long count_loc(std::string_view source)
{
    long loc = 0;
    bool content = false;
    for (const char c : source) {
        if (c == '\n') {
            loc += content ? 1 : 0;
            content = false;
        } else if (c != ' ' && c != '\t' && c != '\r' && c != '\f' && c != '\v') {
            content = true;
        }
    }
    return loc + (content ? 1 : 0);
}

[[nodiscard]] inline FileMetrics file_metrics(const JsAst& ast, std::string_view source)
{
    FileMetrics m;
    m.loc = count_loc(source);
    const auto cc = cyclomatic(ast);
    m.function_count = static_cast<long>(cc.functions.size());
    m.cyclomatic_total = cc.total;
    m.cyclomatic_avg = static_cast<double>(m.cyclomatic_total) / static_cast<double>(std::max(1L, m.function_count));
    for (const auto& child : ast.root.children) {
        if (child.kind == NodeKind::VarDecl && child.name) {
            m.global_var_names.insert(*child.name);
        }
    }
    walk(ast.root, [&](const Node& n) {
        if (n.kind == NodeKind::Comment) {
            m.comment_nodes.push_back({n.span, n.text_hash});
        }
    });
    return m;
}

}  // namespace semverml::js
