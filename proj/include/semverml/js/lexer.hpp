#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace semverml::js {

enum class TokenType { Identifier, Number, String, Template, Regex, Punct, End };

struct Token {
    TokenType type = TokenType::End;
    std::string_view text;
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t line = 1;
    std::size_t end_line = 1;
    bool newline_before = false;
};

struct CommentToken {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t line = 1;
    std::size_t end_line = 1;
};

struct LexResult {
    std::vector<Token> tokens;  // always terminated by an End token
    std::vector<CommentToken> comments;
};

namespace detail {

constexpr bool is_ident_start(unsigned char c) noexcept
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' || c == '\\' || c >= 0x80;
}

constexpr bool is_ident_part(unsigned char c) noexcept { return is_ident_start(c) || (c >= '0' && c <= '9'); }

constexpr bool is_digit(unsigned char c) noexcept { return c >= '0' && c <= '9'; }

inline bool regex_allowed_after(const Token* prev) noexcept
{
    if (prev == nullptr) {
        return true;
    }
    switch (prev->type) {
    case TokenType::Number:
    case TokenType::String:
    case TokenType::Template:
    case TokenType::Regex: return false;
    case TokenType::Punct: return prev->text != ")" && prev->text != "]" && prev->text != "}";
    case TokenType::Identifier: {
        static constexpr std::string_view kw[] = {"return", "typeof", "instanceof", "in",   "of",
                                                                "new",    "delete", "void",       "throw", "case",
                                                                "do",     "else",   "yield",      "await"};
        for (auto k : kw) {
            if (prev->text == k) {
                return true;
            }
        }
        return false;
    }
    case TokenType::End: return true;
    }
    return true;
}

}  // namespace detail

/// Tokenizes JavaScript source. Never fails: unknown bytes become one-byte
/// punctuators and unterminated literals run to the end of their line or file.
class Lexer {
public:
    explicit Lexer(std::string_view source) : src_(source) {}

    LexResult run()
    {
        LexResult out;
        skip_shebang();
        bool newline = false;
        while (true) {
            newline |= skip_space_and_comments(out.comments);
            if (pos_ >= src_.size()) {
                break;
            }
            const Token* prev = out.tokens.empty() ? nullptr : &out.tokens.back();
            Token tok = next_token(prev);
            tok.newline_before = newline;
            newline = false;
            out.tokens.push_back(tok);
        }
        Token end;
        end.type = TokenType::End;
        end.begin = end.end = src_.size();
        end.line = end.end_line = line_;
        end.newline_before = true;
        out.tokens.push_back(end);
        return out;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;

    [[nodiscard]] unsigned char at(std::size_t i) const noexcept
    {
        return i < src_.size() ? static_cast<unsigned char>(src_[i]) : 0;
    }

    void advance() noexcept
    {
        if (src_[pos_] == '\n') {
            ++line_;
        }
        ++pos_;
    }

    void skip_shebang()
    {
        if (src_.size() >= 2 && src_[0] == '#' && src_[1] == '!') {
            while (pos_ < src_.size() && src_[pos_] != '\n') {
                ++pos_;
            }
        }
    }

    bool skip_space_and_comments(std::vector<CommentToken>& comments)
    {
        bool newline = false;
        while (pos_ < src_.size()) {
            const unsigned char c = at(pos_);
            if (c == '\n') {
                newline = true;
                advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
                advance();
            } else if (c == 0xEF && at(pos_ + 1) == 0xBB && at(pos_ + 2) == 0xBF) {
                pos_ += 3;
            } else if (c == '/' && at(pos_ + 1) == '/') {
                CommentToken ct{pos_, pos_, line_, line_};
                while (pos_ < src_.size() && src_[pos_] != '\n') {
                    advance();
                }
                ct.end = pos_;
                comments.push_back(ct);
            } else if (c == '/' && at(pos_ + 1) == '*') {
                CommentToken ct{pos_, pos_, line_, line_};
                pos_ += 2;
                while (pos_ < src_.size() && !(src_[pos_] == '*' && at(pos_ + 1) == '/')) {
                    newline |= src_[pos_] == '\n';
                    advance();
                }
                pos_ = pos_ < src_.size() ? pos_ + 2 : pos_;
                ct.end = pos_;
                ct.end_line = line_;
                comments.push_back(ct);
            } else {
                break;
            }
        }
        return newline;
    }

    Token make(TokenType type, std::size_t begin, std::size_t begin_line) const
    {
        Token t;
        t.type = type;
        t.begin = begin;
        t.end = pos_;
        t.text = src_.substr(begin, pos_ - begin);
        t.line = begin_line;
        t.end_line = line_;
        return t;
    }

    Token next_token(const Token* prev)
    {
        const std::size_t begin = pos_;
        const std::size_t begin_line = line_;
        const unsigned char c = at(pos_);

        if (detail::is_ident_start(c) || (c == '#' && detail::is_ident_start(at(pos_ + 1)))) {
            advance();
            while (pos_ < src_.size() && detail::is_ident_part(at(pos_))) {
                advance();
            }
            return make(TokenType::Identifier, begin, begin_line);
        }
        if (detail::is_digit(c) || (c == '.' && detail::is_digit(at(pos_ + 1)))) {
            advance();
            while (pos_ < src_.size()) {
                const unsigned char d = at(pos_);
                if ((d == '+' || d == '-') && (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E') &&
                    !(src_[begin] == '0' && (at(begin + 1) == 'x' || at(begin + 1) == 'X'))) {
                    advance();
                } else if (detail::is_ident_part(d) || d == '.') {
                    advance();
                } else {
                    break;
                }
            }
            return make(TokenType::Number, begin, begin_line);
        }
        if (c == '"' || c == '\'') {
            advance();
            while (pos_ < src_.size() && at(pos_) != c && at(pos_) != '\n') {
                if (at(pos_) == '\\' && pos_ + 1 < src_.size()) {
                    advance();
                }
                advance();
            }
            if (pos_ < src_.size() && at(pos_) == c) {
                advance();
            }
            return make(TokenType::String, begin, begin_line);
        }
        if (c == '`') {
            scan_template();
            return make(TokenType::Template, begin, begin_line);
        }
        if (c == '/' && detail::regex_allowed_after(prev) && scan_regex()) {
            return make(TokenType::Regex, begin, begin_line);
        }
        static constexpr std::string_view puncts[] = {
            ">>>=", "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "&&=", "||=", "?\?=", "=>", "==",
            "!=",   "<=",  ">=",  "&&",  "||",  "??",  "?.",  "++",  "--",  "+=",  "-=",  "*=", "/=",
            "%=",   "&=",  "|=",  "^=",  "**",  "<<",  ">>",  "{",   "}",   "(",   ")",   "[",  "]",
            ";",    ",",   "<",   ">",   "+",   "-",   "*",   "/",   "%",   "&",   "|"};
        static constexpr std::string_view singles[] = {"^", "!", "~", "?", ":", "=", ".", "@"};
        const std::string_view rest = src_.substr(pos_);
        for (auto p : puncts) {
            if (rest.starts_with(p)) {
                if (p == "?." && detail::is_digit(at(pos_ + 2))) {
                    continue;
                }
                pos_ += p.size();
                return make(TokenType::Punct, begin, begin_line);
            }
        }
        for (auto p : singles) {
            if (rest.starts_with(p)) {
                pos_ += 1;
                return make(TokenType::Punct, begin, begin_line);
            }
        }
        advance();
        return make(TokenType::Punct, begin, begin_line);
    }

    // Scans a template literal including nested ${ } substitutions.
    void scan_template()
    {
        advance();  // opening backtick
        while (pos_ < src_.size()) {
            const unsigned char c = at(pos_);
            if (c == '\\') {
                advance();
                if (pos_ < src_.size()) {
                    advance();
                }
            } else if (c == '`') {
                advance();
                return;
            } else if (c == '$' && at(pos_ + 1) == '{') {
                pos_ += 2;
                scan_substitution();
            } else {
                advance();
            }
        }
    }

    void scan_substitution()
    {
        int depth = 1;
        while (pos_ < src_.size() && depth > 0) {
            const unsigned char c = at(pos_);
            if (c == '{') {
                ++depth;
                advance();
            } else if (c == '}') {
                --depth;
                advance();
            } else if (c == '`') {
                scan_template();
            } else if (c == '"' || c == '\'') {
                advance();
                while (pos_ < src_.size() && at(pos_) != c && at(pos_) != '\n') {
                    if (at(pos_) == '\\' && pos_ + 1 < src_.size()) {
                        advance();
                    }
                    advance();
                }
                if (pos_ < src_.size() && at(pos_) == c) {
                    advance();
                }
            } else {
                advance();
            }
        }
    }

    bool scan_regex()
    {
        std::size_t i = pos_ + 1;
        bool in_class = false;
        while (i < src_.size()) {
            const unsigned char c = at(i);
            if (c == '\n') {
                return false;
            }
            if (c == '\\') {
                i += 2;
                continue;
            }
            if (c == '[') {
                in_class = true;
            } else if (c == ']') {
                in_class = false;
            } else if (c == '/' && !in_class) {
                break;
            }
            ++i;
        }
        if (i >= src_.size() || i == pos_ + 1) {
            return false;
        }
        ++i;
        while (i < src_.size() && detail::is_ident_part(at(i))) {
            ++i;
        }
        pos_ = i;
        return true;
    }
};

[[nodiscard]] inline LexResult lex(std::string_view source) { return Lexer(source).run(); }

}  // namespace semverml::js
