#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semverml/js/ast.hpp"
#include "semverml/js/lexer.hpp"

namespace semverml::js {

struct ParseOptions {
    // Combined statement/expression nesting beyond which a region degrades to
    // an Other node.
    int max_depth = 500;
};

namespace detail {

struct ParseFailure {};

inline std::string normalize_space(std::string_view text)
{
    std::string out;
    bool pending = false;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            pending = !out.empty();
            continue;
        }
        if (pending) {
            out.push_back(' ');
            pending = false;
        }
        out.push_back(c);
    }
    return out;
}

class Parser {
public:
    Parser(std::string_view source, LexResult lexed, ParseOptions options)
        : src_(source), toks_(std::move(lexed.tokens)), comments_(std::move(lexed.comments)), opts_(options)
    {
        match_brackets();
    }

    JsAst run()
    {
        JsAst ast;
        Node& root = ast.root;
        root.kind = NodeKind::Program;
        root.begin = 0;
        root.end = src_.size();
        root.span = {1, toks_.back().end_line};
        {
            OwnerScope scope(*this, root);
            parse_statement_list(root, /*program=*/true);
        }
        attach_comments(root);
        finalize_hashes(root);
        ast.parse_warnings = warnings_;
        return ast;
    }

private:
    std::string_view src_;
    std::vector<Token> toks_;
    std::vector<CommentToken> comments_;
    std::vector<std::ptrdiff_t> match_;  // index of the matching bracket token, or -1
    ParseOptions opts_;
    std::size_t pos_ = 0;
    int depth_ = 0;
    std::size_t warnings_ = 0;
    std::vector<Node*> owners_;

    // ---------------------------------------------------------------- helpers

    struct OwnerScope {
        Parser& p;
        OwnerScope(Parser& parser, Node& node) : p(parser) { p.owners_.push_back(&node); }
        ~OwnerScope() { p.owners_.pop_back(); }
        OwnerScope(const OwnerScope&) = delete;
        OwnerScope& operator=(const OwnerScope&) = delete;
    };

    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& parser) : p(parser)
        {
            if (++p.depth_ > p.opts_.max_depth) {
                --p.depth_;
                throw ParseFailure{};
            }
        }
        ~DepthGuard() { --p.depth_; }
        DepthGuard(const DepthGuard&) = delete;
        DepthGuard& operator=(const DepthGuard&) = delete;
    };

    void match_brackets()
    {
        match_.assign(toks_.size(), -1);
        std::vector<std::size_t> stack;
        for (std::size_t i = 0; i < toks_.size(); ++i) {
            const auto& t = toks_[i];
            if (t.type != TokenType::Punct) {
                continue;
            }
            if (t.text == "(" || t.text == "[" || t.text == "{") {
                stack.push_back(i);
            } else if (t.text == ")" || t.text == "]" || t.text == "}") {
                const char open = t.text == ")" ? '(' : (t.text == "]" ? '[' : '{');
                if (!stack.empty() && toks_[stack.back()].text[0] == open) {
                    match_[stack.back()] = static_cast<std::ptrdiff_t>(i);
                    match_[i] = static_cast<std::ptrdiff_t>(stack.back());
                    stack.pop_back();
                }
            }
        }
    }

    [[nodiscard]] const Token& cur() const { return toks_[pos_]; }
    [[nodiscard]] const Token& peek(std::size_t ahead = 1) const
    {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    [[nodiscard]] bool at_end() const { return cur().type == TokenType::End; }

    [[nodiscard]] bool is(std::string_view text) const
    {
        const auto& t = cur();
        return (t.type == TokenType::Punct || t.type == TokenType::Identifier) && t.text == text;
    }
    [[nodiscard]] bool is_punct(std::string_view text) const
    {
        return cur().type == TokenType::Punct && cur().text == text;
    }
    [[nodiscard]] static bool tok_is(const Token& t, std::string_view text)
    {
        return (t.type == TokenType::Punct || t.type == TokenType::Identifier) && t.text == text;
    }

    const Token& take()
    {
        const Token& t = toks_[pos_];
        if (t.type != TokenType::End) {
            ++pos_;
        }
        return t;
    }

    void expect(std::string_view text)
    {
        if (!is(text)) {
            throw ParseFailure{};
        }
        take();
    }

    bool accept(std::string_view text)
    {
        if (is(text)) {
            take();
            return true;
        }
        return false;
    }

    [[nodiscard]] const Token& last() const { return toks_[pos_ == 0 ? 0 : pos_ - 1]; }

    void open_node(Node& node, NodeKind kind) const
    {
        node.kind = kind;
        node.begin = cur().begin;
        node.span.start_line = cur().line;
    }

    void close_node(Node& node) const
    {
        const Token& l = last();
        node.end = std::max(node.begin, l.end);
        node.span.end_line = std::max(node.span.start_line, l.end_line);
    }

    void add_decision() { owners_.back()->decisions += 1; }

    void add_child(Node&& node) { owners_.back()->children.push_back(std::move(node)); }

    static bool is_reserved(std::string_view w)
    {
        static constexpr std::string_view words[] = {
            "break",  "case",   "catch",  "const",   "continue", "debugger", "default", "do",
            "else",   "export", "extends", "finally", "for",     "if",       "in",      "instanceof",
            "return", "switch", "throw",  "try",     "var",      "while",    "with",    "enum"};
        return std::find(std::begin(words), std::end(words), w) != std::end(words);
    }

    [[nodiscard]] bool statement_can_end() const
    {
        return is_punct(";") || is_punct("}") || at_end() || cur().newline_before;
    }

    void end_statement()
    {
        if (accept(";")) {
            return;
        }
        if (is_punct("}") || at_end() || cur().newline_before) {
            return;
        }
        throw ParseFailure{};
    }

    // Names an anonymous function created directly by the expression starting
    // at token index `start` (e.g. `x = function () {}` or `key: () => 1`).
    void infer_name(std::size_t child_count_before, std::size_t start, const std::string& name)
    {
        auto& kids = owners_.back()->children;
        if (name.empty() || kids.size() <= child_count_before) {
            return;
        }
        Node& first = kids[child_count_before];
        if ((is_function(first.kind) || first.kind == NodeKind::Statement) && !first.name &&
            first.begin == toks_[start].begin) {
            first.name = name;
        }
    }

    // ------------------------------------------------------------- statements

    void parse_statement_list(Node& owner, bool program)
    {
        while (!at_end() && !(is_punct("}") && !program)) {
            const std::size_t start = pos_;
            const std::size_t kids_before = owner.children.size();
            try {
                parse_statement(program);
            } catch (const ParseFailure&) {
                pos_ = start;
                owner.children.resize(kids_before);
                recover(owner);
            }
        }
    }

    // Skips to the end of the broken region and records it as an Other node.
    void recover(Node& owner)
    {
        ++warnings_;
        Node other;
        open_node(other, NodeKind::Other);
        int balance = 0;
        bool consumed = false;
        while (!at_end()) {
            const Token& t = cur();
            if (consumed && balance == 0 && t.newline_before) {
                break;
            }
            if (t.type == TokenType::Punct) {
                if (t.text == "(" || t.text == "[" || t.text == "{") {
                    ++balance;
                } else if (t.text == ")" || t.text == "]" || t.text == "}") {
                    if (balance == 0 && consumed) {
                        break;
                    }
                    balance = std::max(0, balance - 1);
                } else if (t.text == ";" && balance == 0) {
                    take();
                    consumed = true;
                    break;
                }
            }
            take();
            consumed = true;
        }
        close_node(other);
        owner.children.push_back(std::move(other));
    }

    void parse_block_into(Node& owner)
    {
        expect("{");
        {
            DepthGuard guard(*this);
            parse_statement_list(owner, false);
        }
        expect("}");
    }

    // Control-statement bodies: block contents are flattened into the owner.
    void parse_body_into(Node& owner)
    {
        if (is_punct("{")) {
            parse_block_into(owner);
        } else {
            parse_statement(false);
        }
    }

    void parse_statement(bool program)
    {
        DepthGuard guard(*this);
        const Token& t = cur();
        if (t.type == TokenType::Punct) {
            if (t.text == ";") {
                take();
                return;
            }
            if (t.text == "{") {
                Node block;
                open_node(block, NodeKind::Statement);
                {
                    OwnerScope scope(*this, block);
                    parse_block_into(block);
                }
                close_node(block);
                add_child(std::move(block));
                return;
            }
        }
        if (t.type == TokenType::Identifier) {
            const std::string_view w = t.text;
            if (w == "function" || (w == "async" && tok_is(peek(), "function") && !peek().newline_before)) {
                add_child(parse_function(NodeKind::FunctionDecl));
                return;
            }
            if (w == "var" || w == "const" ||
                (w == "let" && (peek().type == TokenType::Identifier || tok_is(peek(), "[") || tok_is(peek(), "{")))) {
                parse_var_statement(program);
                return;
            }
            if (w == "class") {
                add_child(parse_class());
                return;
            }
            if (w == "export") {
                parse_export(program);
                return;
            }
            if (w == "import" && !tok_is(peek(), "(") && !tok_is(peek(), ".")) {
                parse_simple_statement([this] { skip_module_clause(); });
                return;
            }
            if (w == "if") {
                parse_if();
                return;
            }
            if (w == "for") {
                parse_control([this](Node& node) {
                    take();
                    add_decision();
                    accept("await");
                    parse_for_head();
                    parse_body_into(node);
                });
                return;
            }
            if (w == "while") {
                parse_control([this](Node& node) {
                    take();
                    add_decision();
                    parse_paren_expression();
                    parse_body_into(node);
                });
                return;
            }
            if (w == "do") {
                parse_control([this](Node& node) {
                    take();
                    add_decision();
                    parse_body_into(node);
                    expect("while");
                    parse_paren_expression();
                    accept(";");
                });
                return;
            }
            if (w == "with") {
                parse_control([this](Node& node) {
                    take();
                    parse_paren_expression();
                    parse_body_into(node);
                });
                return;
            }
            if (w == "switch") {
                parse_control([this](Node& node) { parse_switch_body(node); });
                return;
            }
            if (w == "try") {
                parse_control([this](Node& node) { parse_try_body(node); });
                return;
            }
            if (w == "return" || w == "throw") {
                parse_simple_statement([this] {
                    take();
                    if (!statement_can_end()) {
                        parse_expression();
                    }
                });
                return;
            }
            if (w == "break" || w == "continue") {
                parse_simple_statement([this] {
                    take();
                    if (cur().type == TokenType::Identifier && !cur().newline_before) {
                        take();
                    }
                });
                return;
            }
            if (w == "debugger") {
                parse_simple_statement([this] { take(); });
                return;
            }
            if (!is_reserved(w) && tok_is(peek(), ":") && w != "default") {
                // labelled statement
                take();
                take();
                parse_statement(program);
                return;
            }
            if (is_reserved(w) && w != "in" && w != "instanceof") {
                throw ParseFailure{};
            }
        }
        parse_simple_statement([this] { parse_expression(); });
    }

    template <typename Body>
    void parse_simple_statement(Body&& body)
    {
        Node stmt;
        open_node(stmt, NodeKind::Statement);
        {
            OwnerScope scope(*this, stmt);
            body();
            end_statement();
        }
        close_node(stmt);
        add_child(std::move(stmt));
    }

    template <typename Body>
    void parse_control(Body&& body)
    {
        Node stmt;
        open_node(stmt, NodeKind::Statement);
        {
            OwnerScope scope(*this, stmt);
            body(stmt);
        }
        close_node(stmt);
        add_child(std::move(stmt));
    }

    void parse_if()
    {
        parse_control([this](Node& node) {
            take();  // if
            add_decision();
            parse_paren_expression();
            parse_body_into(node);
            if (accept("else")) {
                parse_body_into(node);
            }
        });
    }

    void parse_paren_expression()
    {
        expect("(");
        parse_expression();
        expect(")");
    }

    void parse_for_head()
    {
        expect("(");
        DepthGuard guard(*this);
        while (!is_punct(")")) {
            if (at_end()) {
                throw ParseFailure{};
            }
            if (accept(";") || accept("var") || accept("const") || accept("of")) {
                continue;
            }
            if (is("let") && peek().type != TokenType::Punct) {
                take();
                continue;
            }
            if (is("let") && (tok_is(peek(), "[") || tok_is(peek(), "{"))) {
                take();
                continue;
            }
            const std::size_t before = pos_;
            parse_expression();
            if (pos_ == before) {
                throw ParseFailure{};
            }
        }
        expect(")");
    }

    void parse_switch_body(Node& node)
    {
        take();  // switch
        parse_paren_expression();
        expect("{");
        DepthGuard guard(*this);
        while (!is_punct("}")) {
            if (at_end()) {
                throw ParseFailure{};
            }
            if (accept("case")) {
                add_decision();
                parse_expression();
                expect(":");
            } else if (accept("default")) {
                expect(":");
            } else {
                const std::size_t start = pos_;
                const std::size_t kids_before = node.children.size();
                try {
                    parse_statement(false);
                } catch (const ParseFailure&) {
                    pos_ = start;
                    node.children.resize(kids_before);
                    recover(node);
                }
            }
        }
        expect("}");
    }

    void parse_try_body(Node& node)
    {
        take();  // try
        parse_block_into(node);
        if (accept("catch")) {
            add_decision();
            if (accept("(")) {
                parse_binding_target();
                expect(")");
            }
            parse_block_into(node);
        }
        if (accept("finally")) {
            parse_block_into(node);
        }
    }

    void parse_binding_target()
    {
        if (cur().type == TokenType::Identifier) {
            take();
        } else if (is_punct("[") || is_punct("{")) {
            parse_primary();
        } else {
            throw ParseFailure{};
        }
    }

    void skip_module_clause()
    {
        // import ... from "x"; / import "x"; / export { a } from "x";
        take();
        while (!at_end()) {
            if (cur().type == TokenType::String) {
                take();
                if (is("assert") || is("with")) {
                    take();
                    if (is_punct("{") && match_[pos_] > 0) {
                        pos_ = static_cast<std::size_t>(match_[pos_]) + 1;
                    }
                }
                return;
            }
            if (is_punct("{") && match_[pos_] > 0) {
                pos_ = static_cast<std::size_t>(match_[pos_]) + 1;
                continue;
            }
            if (is_punct(";")) {
                return;
            }
            if (cur().newline_before && !is("from") && last().text != "from" && last().text != "," &&
                last().text != "import" && last().text != "export" && last().text != "*" && last().text != "as") {
                return;
            }
            take();
        }
    }

    void parse_export(bool program)
    {
        const Token& next = peek();
        if (tok_is(next, "default")) {
            take();
            take();
            if (is("function") || (is("async") && tok_is(peek(), "function"))) {
                Node fn = parse_function(NodeKind::FunctionDecl);
                if (!fn.name) {
                    fn.name = "default";
                }
                add_child(std::move(fn));
                return;
            }
            if (is("class")) {
                add_child(parse_class());
                return;
            }
            parse_simple_statement([this] { parse_expression(); });
            return;
        }
        if (tok_is(next, "{") || tok_is(next, "*")) {
            parse_simple_statement([this] { skip_module_clause(); });
            return;
        }
        take();
        parse_statement(program);
    }

    // `var`/`let`/`const`. At Program level each declarator is a VarDecl node;
    // elsewhere the whole declaration is one Statement.
    void parse_var_statement(bool program)
    {
        if (!program) {
            parse_simple_statement([this] {
                take();
                parse_declarators(nullptr);
            });
            return;
        }
        std::vector<Node> decls;
        const std::size_t keyword_begin = cur().begin;
        const std::size_t keyword_line = cur().line;
        take();
        parse_declarators(&decls);
        end_statement();
        if (!decls.empty()) {
            decls.front().begin = keyword_begin;
            decls.front().span.start_line = keyword_line;
            close_node(decls.back());
        }
        for (auto& d : decls) {
            add_child(std::move(d));
        }
    }

    void collect_pattern_names(std::size_t from, std::size_t to, std::vector<std::string>& names) const
    {
        // Binding identifiers inside a destructuring pattern: identifiers not
        // followed by ':' and not preceded by '=' default values at depth 0.
        int depth = 0;
        for (std::size_t i = from; i < to; ++i) {
            const Token& t = toks_[i];
            if (t.type == TokenType::Punct) {
                if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
                if (t.text == ")" || t.text == "]" || t.text == "}") --depth;
                if (t.text == "=" && i + 1 < to) {
                    // skip default initializer up to the next ',' or closing bracket at the same depth
                    int d = 0;
                    std::size_t j = i + 1;
                    for (; j < to; ++j) {
                        const Token& u = toks_[j];
                        if (u.type == TokenType::Punct) {
                            if (u.text == "(" || u.text == "[" || u.text == "{") ++d;
                            if (u.text == ")" || u.text == "]" || u.text == "}") {
                                if (d == 0) break;
                                --d;
                            }
                            if (u.text == "," && d == 0) break;
                        }
                    }
                    i = j - 1;
                }
                continue;
            }
            if (t.type == TokenType::Identifier && i + 1 <= to) {
                const Token& n = toks_[i + 1];
                if (!(n.type == TokenType::Punct && n.text == ":")) {
                    names.emplace_back(t.text);
                }
            }
        }
    }

    void parse_declarators(std::vector<Node>* out)
    {
        while (true) {
            const std::size_t start = pos_;
            Node decl;
            open_node(decl, NodeKind::VarDecl);
            std::vector<std::string> names;
            if (cur().type == TokenType::Identifier) {
                names.emplace_back(take().text);
            } else if (is_punct("[") || is_punct("{")) {
                const auto close = match_[pos_];
                if (close < 0) {
                    throw ParseFailure{};
                }
                collect_pattern_names(pos_ + 1, static_cast<std::size_t>(close), names);
                pos_ = static_cast<std::size_t>(close) + 1;
            } else {
                throw ParseFailure{};
            }
            if (out != nullptr) {
                OwnerScope scope(*this, decl);
                if (accept("=")) {
                    const std::size_t value_start = pos_;
                    parse_assignment();
                    infer_name(0, value_start, names.size() == 1 ? names.front() : std::string{});
                }
            } else if (accept("=")) {
                const std::size_t value_start = pos_;
                const std::size_t kids = owners_.back()->children.size();
                parse_assignment();
                infer_name(kids, value_start, names.size() == 1 ? names.front() : std::string{});
            }
            close_node(decl);
            if (out != nullptr) {
                if (names.empty()) {
                    names.emplace_back(normalize_space(src_.substr(toks_[start].begin, decl.end - toks_[start].begin)));
                }
                // One VarDecl per bound name; functions in the initializer stay
                // with the first of them.
                for (std::size_t k = 0; k < names.size(); ++k) {
                    Node copy;
                    copy.kind = NodeKind::VarDecl;
                    copy.begin = decl.begin;
                    copy.end = decl.end;
                    copy.span = decl.span;
                    copy.decisions = k == 0 ? decl.decisions : 0;
                    copy.name = names[k];
                    if (k == 0) {
                        copy.children = std::move(decl.children);
                    }
                    out->push_back(std::move(copy));
                }
            }
            if (!accept(",")) {
                break;
            }
        }
    }

    // ------------------------------------------------------------- functions

    void parse_params(Node& fn)
    {
        expect("(");
        DepthGuard guard(*this);
        OwnerScope scope(*this, fn);
        while (!is_punct(")")) {
            if (at_end()) {
                throw ParseFailure{};
            }
            parse_single_param(fn);
            if (!accept(",")) {
                break;
            }
        }
        expect(")");
    }

    void parse_single_param(Node& fn)
    {
        Node param;
        open_node(param, NodeKind::Param);
        std::string name;
        if (accept("...")) {
            name = "...";
        }
        if (cur().type == TokenType::Identifier) {
            name += std::string(take().text);
        } else if (is_punct("[") || is_punct("{")) {
            const auto close = match_[pos_];
            if (close < 0) {
                throw ParseFailure{};
            }
            const std::size_t from = cur().begin;
            pos_ = static_cast<std::size_t>(close) + 1;
            name += normalize_space(src_.substr(from, last().end - from));
        } else {
            throw ParseFailure{};
        }
        if (accept("=")) {
            // functions in default values belong to the enclosing function node
            parse_assignment();
        }
        close_node(param);
        param.name = std::move(name);
        // keep params ahead of any function nodes created by default values
        auto& kids = fn.children;
        auto it = std::find_if(kids.begin(), kids.end(), [](const Node& n) { return n.kind != NodeKind::Param; });
        kids.insert(it, std::move(param));
    }

    void parse_function_body(Node& fn)
    {
        OwnerScope scope(*this, fn);
        parse_block_into(fn);
    }

    // `function` / `async function` / generators, as declaration or expression.
    Node parse_function(NodeKind kind)
    {
        DepthGuard guard(*this);
        Node fn;
        open_node(fn, kind);
        accept("async");
        expect("function");
        accept("*");
        if (cur().type == TokenType::Identifier && !is_punct("(")) {
            fn.name = std::string(take().text);
        }
        parse_params(fn);
        parse_function_body(fn);
        close_node(fn);
        return fn;
    }

    Node parse_arrow()
    {
        DepthGuard guard(*this);
        Node fn;
        open_node(fn, NodeKind::ArrowFunction);
        if (is("async") && !tok_is(peek(), "=>")) {
            take();
        }
        if (is_punct("(")) {
            parse_params(fn);
        } else {
            Node param;
            open_node(param, NodeKind::Param);
            param.name = std::string(take().text);
            close_node(param);
            fn.children.push_back(std::move(param));
        }
        expect("=>");
        if (is_punct("{")) {
            parse_function_body(fn);
        } else {
            OwnerScope scope(*this, fn);
            parse_assignment();
        }
        close_node(fn);
        return fn;
    }

    // Method definition starting at the property key (modifiers already consumed).
    Node parse_method_from_key(std::size_t begin_tok, std::string name)
    {
        Node fn;
        fn.kind = NodeKind::Method;
        fn.begin = toks_[begin_tok].begin;
        fn.span.start_line = toks_[begin_tok].line;
        fn.name = std::move(name);
        parse_params(fn);
        parse_function_body(fn);
        close_node(fn);
        return fn;
    }

    // Parses a property key; returns its display name.
    std::string parse_property_key()
    {
        const Token& t = cur();
        if (t.type == TokenType::Identifier || t.type == TokenType::Number) {
            return std::string(take().text);
        }
        if (t.type == TokenType::String) {
            std::string_view s = take().text;
            if (s.size() >= 2) {
                s = s.substr(1, s.size() - 2);
            }
            return std::string(s);
        }
        if (is_punct("[")) {
            const std::size_t from = t.begin;
            take();
            parse_assignment();
            expect("]");
            return normalize_space(src_.substr(from, last().end - from));
        }
        throw ParseFailure{};
    }

    [[nodiscard]] bool is_modifier_before_key(std::string_view word) const
    {
        if (!is(word)) {
            return false;
        }
        const Token& n = peek();
        if (n.newline_before && word != "static") {
            return false;
        }
        if (n.type == TokenType::Punct) {
            return n.text == "[" || n.text == "*" || (n.text == "{" && word == "static");
        }
        return n.type != TokenType::End;
    }

    Node parse_class()
    {
        DepthGuard guard(*this);
        Node cls;
        open_node(cls, NodeKind::Statement);
        OwnerScope scope(*this, cls);
        expect("class");
        if (cur().type == TokenType::Identifier && !is("extends")) {
            cls.name = std::string(take().text);
        }
        if (accept("extends")) {
            parse_lhs();
        }
        expect("{");
        while (!is_punct("}")) {
            if (at_end()) {
                throw ParseFailure{};
            }
            if (accept(";")) {
                continue;
            }
            const std::size_t member_start = pos_;
            if (is("static") && tok_is(peek(), "{")) {
                take();
                Node block;
                open_node(block, NodeKind::Statement);
                {
                    OwnerScope inner(*this, block);
                    parse_block_into(block);
                }
                close_node(block);
                add_child(std::move(block));
                continue;
            }
            while (is_modifier_before_key("static") || is_modifier_before_key("async") ||
                   is_modifier_before_key("get") || is_modifier_before_key("set")) {
                take();
            }
            accept("*");
            std::string key = parse_property_key();
            if (is_punct("(")) {
                add_child(parse_method_from_key(member_start, std::move(key)));
                continue;
            }
            // field
            if (accept("=")) {
                const std::size_t value_start = pos_;
                const std::size_t kids = cls.children.size();
                parse_assignment();
                infer_name(kids, value_start, key);
            }
            if (!accept(";") && !is_punct("}") && !cur().newline_before) {
                throw ParseFailure{};
            }
        }
        expect("}");
        close_node(cls);
        return cls;
    }

    // ------------------------------------------------------------ expressions

    void parse_expression()
    {
        parse_assignment();
        while (accept(",")) {
            parse_assignment();
        }
    }

    [[nodiscard]] bool arrow_ahead() const
    {
        std::size_t i = pos_;
        if (i + 2 >= toks_.size()) {
            return false;
        }
        if (tok_is(toks_[i], "async") && !tok_is(toks_[i + 1], "=>") && !toks_[i + 1].newline_before) {
            ++i;
        }
        const Token& t = toks_[i];
        if (t.type == TokenType::Identifier && !is_reserved(t.text)) {
            return tok_is(toks_[i + 1], "=>");
        }
        if (t.type == TokenType::Punct && t.text == "(" && match_[i] > 0) {
            const auto close = static_cast<std::size_t>(match_[i]);
            return close + 1 < toks_.size() && tok_is(toks_[close + 1], "=>");
        }
        return false;
    }

    static bool is_assign_op(const Token& t)
    {
        if (t.type != TokenType::Punct) {
            return false;
        }
        static constexpr std::string_view ops[] = {"=",  "+=", "-=", "*=",  "/=",   "%=",  "**=", "<<=",
                                                   ">>=", ">>>=", "&=", "|=", "^=", "&&=", "||=", "?\?="};
        return std::find(std::begin(ops), std::end(ops), t.text) != std::end(ops);
    }

    void parse_assignment()
    {
        DepthGuard guard(*this);
        if (arrow_ahead()) {
            add_child(parse_arrow());
            return;
        }
        if (is("yield")) {
            take();
            accept("*");
            if (!statement_can_end() && !is_punct(")") && !is_punct("]") && !is_punct(",") && !is_punct(":")) {
                parse_assignment();
            }
            return;
        }
        const std::size_t lhs_start = pos_;
        parse_conditional();
        if (is_assign_op(cur())) {
            // name hint from the last identifier of the target (`a.b.c = function(){}`)
            std::string hint;
            if (last().type == TokenType::Identifier && pos_ > lhs_start) {
                hint = std::string(last().text);
            }
            take();
            const std::size_t value_start = pos_;
            const std::size_t kids = owners_.back()->children.size();
            parse_assignment();
            infer_name(kids, value_start, hint);
        }
    }

    void parse_conditional()
    {
        parse_binary(0);
        if (is_punct("?")) {
            take();
            add_decision();
            parse_assignment();
            expect(":");
            parse_assignment();
        }
    }

    static int binary_precedence(const Token& t)
    {
        if (t.type == TokenType::Identifier) {
            return (t.text == "instanceof" || t.text == "in") ? 8 : -1;
        }
        if (t.type != TokenType::Punct) {
            return -1;
        }
        const std::string_view s = t.text;
        if (s == "??") return 1;
        if (s == "||") return 2;
        if (s == "&&") return 3;
        if (s == "|") return 4;
        if (s == "^") return 5;
        if (s == "&") return 6;
        if (s == "==" || s == "!=" || s == "===" || s == "!==") return 7;
        if (s == "<" || s == ">" || s == "<=" || s == ">=") return 8;
        if (s == "<<" || s == ">>" || s == ">>>") return 9;
        if (s == "+" || s == "-") return 10;
        if (s == "*" || s == "/" || s == "%") return 11;
        if (s == "**") return 12;
        return -1;
    }

    void parse_binary(int min_prec)
    {
        DepthGuard guard(*this);
        parse_unary();
        while (true) {
            const int prec = binary_precedence(cur());
            if (prec < 0 || prec < min_prec) {
                return;
            }
            const std::string_view op = take().text;
            if (op == "&&" || op == "||") {
                add_decision();
            }
            // ** is right-associative
            parse_binary(op == "**" ? prec : prec + 1);
        }
    }

    void parse_unary()
    {
        DepthGuard guard(*this);
        const Token& t = cur();
        if (t.type == TokenType::Punct &&
            (t.text == "!" || t.text == "~" || t.text == "+" || t.text == "-" || t.text == "++" || t.text == "--")) {
            take();
            parse_unary();
            return;
        }
        if (t.type == TokenType::Identifier &&
            (t.text == "typeof" || t.text == "void" || t.text == "delete" ||
             (t.text == "await" && peek().type != TokenType::Punct) ||
             (t.text == "await" && (tok_is(peek(), "(") || tok_is(peek(), "[") || tok_is(peek(), "!"))))) {
            take();
            parse_unary();
            return;
        }
        parse_lhs();
        if ((is_punct("++") || is_punct("--")) && !cur().newline_before) {
            take();
        }
    }

    void parse_arguments()
    {
        expect("(");
        DepthGuard guard(*this);
        while (!is_punct(")")) {
            if (at_end()) {
                throw ParseFailure{};
            }
            accept("...");
            parse_assignment();
            if (!accept(",")) {
                break;
            }
        }
        expect(")");
    }

    void parse_lhs()
    {
        DepthGuard guard(*this);
        if (is("new")) {
            take();
            if (accept(".")) {
                take();  // new.target
            } else {
                parse_lhs();
                return;
            }
        } else {
            parse_primary();
        }
        while (true) {
            if (is_punct(".") || is_punct("?.")) {
                take();
                if (is_punct("(")) {
                    parse_arguments();
                } else if (is_punct("[")) {
                    take();
                    parse_expression();
                    expect("]");
                } else if (cur().type == TokenType::Identifier) {
                    take();
                } else {
                    throw ParseFailure{};
                }
            } else if (is_punct("[")) {
                take();
                parse_expression();
                expect("]");
            } else if (is_punct("(")) {
                parse_arguments();
            } else if (cur().type == TokenType::Template) {
                take();
            } else {
                return;
            }
        }
    }

    void parse_primary()
    {
        DepthGuard guard(*this);
        const Token& t = cur();
        switch (t.type) {
        case TokenType::Number:
        case TokenType::String:
        case TokenType::Template:
        case TokenType::Regex: take(); return;
        case TokenType::End: throw ParseFailure{};
        case TokenType::Identifier: {
            if (t.text == "function" || (t.text == "async" && tok_is(peek(), "function") && !peek().newline_before)) {
                add_child(parse_function(NodeKind::FunctionExpr));
                return;
            }
            if (t.text == "class") {
                add_child(parse_class());
                return;
            }
            if (is_reserved(t.text)) {
                throw ParseFailure{};
            }
            take();
            return;
        }
        case TokenType::Punct: break;
        }
        if (t.text == "(") {
            take();
            parse_expression();
            expect(")");
            return;
        }
        if (t.text == "[") {
            take();
            DepthGuard inner(*this);
            while (!is_punct("]")) {
                if (at_end()) {
                    throw ParseFailure{};
                }
                if (accept(",")) {
                    continue;
                }
                accept("...");
                parse_assignment();
                if (!accept(",")) {
                    break;
                }
            }
            expect("]");
            return;
        }
        if (t.text == "{") {
            parse_object_literal();
            return;
        }
        if (t.text == "#" || t.text == "@") {
            take();
            parse_lhs();
            return;
        }
        throw ParseFailure{};
    }

    void parse_object_literal()
    {
        expect("{");
        DepthGuard guard(*this);
        while (!is_punct("}")) {
            if (at_end()) {
                throw ParseFailure{};
            }
            const std::size_t member_start = pos_;
            if (accept("...")) {
                parse_assignment();
            } else {
                while (is_modifier_before_key("async") || is_modifier_before_key("get") ||
                       is_modifier_before_key("set")) {
                    take();
                }
                accept("*");
                std::string key = parse_property_key();
                if (is_punct("(")) {
                    add_child(parse_method_from_key(member_start, std::move(key)));
                } else if (accept(":")) {
                    const std::size_t value_start = pos_;
                    const std::size_t kids = owners_.back()->children.size();
                    parse_assignment();
                    infer_name(kids, value_start, key);
                } else if (accept("=")) {
                    parse_assignment();  // shorthand with default in a pattern
                }
            }
            if (!accept(",")) {
                break;
            }
        }
        expect("}");
    }

    // ------------------------------------------------------------ finishing

    static bool can_hold_comments(NodeKind kind)
    {
        return kind != NodeKind::Param && kind != NodeKind::Comment;
    }

    void attach_comment(Node& node, Node&& comment)
    {
        for (auto& child : node.children) {
            if (can_hold_comments(child.kind) && child.begin <= comment.begin && comment.end <= child.end &&
                child.begin < child.end) {
                attach_comment(child, std::move(comment));
                return;
            }
        }
        auto it = std::lower_bound(node.children.begin(), node.children.end(), comment.begin,
                                   [](const Node& n, std::size_t b) { return n.begin < b; });
        node.children.insert(it, std::move(comment));
    }

    void attach_comments(Node& root)
    {
        for (const auto& c : comments_) {
            Node comment;
            comment.kind = NodeKind::Comment;
            comment.begin = c.begin;
            comment.end = c.end;
            comment.span = {c.line, c.end_line};
            attach_comment(root, std::move(comment));
        }
    }

    void finalize_hashes(Node& node)
    {
        node.text_hash = normalized_hash(src_.substr(node.begin, node.end - node.begin));
        for (auto& child : node.children) {
            finalize_hashes(child);
        }
    }
};

}  // namespace detail

/// Parses the supported JavaScript subset. Total: malformed regions become
/// Other nodes and bump `parse_warnings`.
[[nodiscard]] inline JsAst parse_js(std::string_view source, ParseOptions options = {})
{
    detail::Parser parser(source, lex(source), options);
    return parser.run();
}

}  // namespace semverml::js
