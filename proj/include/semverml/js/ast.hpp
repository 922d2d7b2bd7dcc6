#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace semverml::js {

enum class NodeKind { Program, FunctionDecl, FunctionExpr, ArrowFunction, Method, Param, VarDecl, Statement, Comment, Other };

[[nodiscard]] inline std::string_view to_string(NodeKind kind) noexcept
{
    switch (kind) {
    case NodeKind::Program: return "Program";
    case NodeKind::FunctionDecl: return "FunctionDecl";
    case NodeKind::FunctionExpr: return "FunctionExpr";
    case NodeKind::ArrowFunction: return "ArrowFunction";
    case NodeKind::Method: return "Method";
    case NodeKind::Param: return "Param";
    case NodeKind::VarDecl: return "VarDecl";
    case NodeKind::Statement: return "Statement";
    case NodeKind::Comment: return "Comment";
    case NodeKind::Other: return "Other";
    }
    return "Other";
}

[[nodiscard]] constexpr bool is_function(NodeKind kind) noexcept
{
    return kind == NodeKind::FunctionDecl || kind == NodeKind::FunctionExpr || kind == NodeKind::ArrowFunction ||
           kind == NodeKind::Method;
}

struct Span {
    std::size_t start_line = 1;
    std::size_t end_line = 1;

    friend bool operator==(const Span&, const Span&) = default;
};

struct Node {
    NodeKind kind = NodeKind::Other;
    std::optional<std::string> name;
    std::vector<Node> children;
    Span span;
    // Byte range [begin, end) of the node's source slice.
    std::size_t begin = 0;
    std::size_t end = 0;
    std::uint64_t text_hash = 0;
    // Decision points owned directly by this node (its keyword plus operators in
    // its own expressions), not counting those inside child nodes.
    int decisions = 0;
};

struct JsAst {
    Node root;
    std::size_t parse_warnings = 0;
};

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

/// FNV-1a over the text with whitespace runs collapsed to one space and the
/// ends trimmed.
[[nodiscard]] inline std::uint64_t normalized_hash(std::string_view text) noexcept
{
    std::uint64_t h = kFnvOffset;
    bool pending_space = false;
    bool any = false;
    for (const char c : text) {
        const bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
        if (ws) {
            pending_space = any;
            continue;
        }
        if (pending_space) {
            h = (h ^ static_cast<unsigned char>(' ')) * kFnvPrime;
            pending_space = false;
        }
        h = (h ^ static_cast<unsigned char>(c)) * kFnvPrime;
        any = true;
    }
    return h;
}

[[nodiscard]] inline std::uint64_t hash_bytes(std::string_view text) noexcept
{
    std::uint64_t h = kFnvOffset;
    for (const char c : text) {
        h = (h ^ static_cast<unsigned char>(c)) * kFnvPrime;
    }
    return h;
}

template <typename Visitor>
void walk(const Node& node, Visitor&& visit)
{
    visit(node);
    for (const auto& child : node.children) {
        walk(child, visit);
    }
}

}  // namespace semverml::js
