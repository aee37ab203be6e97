#pragma once

// A forgiving tokenizer for single-line encoded Python fragments. It never
// fails: unterminated strings run to the end of the text and unknown bytes
// become one-character operator tokens.

#include <snipscan/corpus.hpp>

#include <algorithm>
#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace snipscan::lex {

enum class Kind { Identifier, String, Number, Operator, Newline, Comment, Space };

struct Token {
    Kind kind;
    std::size_t begin;
    std::size_t end;

    std::string_view text(std::string_view src) const { return src.substr(begin, end - begin); }
};

inline bool is_ident_start(char c) {
    auto u = static_cast<unsigned char>(c);
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || u >= 0x80;
}

inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

inline bool is_keyword(std::string_view w) {
    static constexpr std::array<std::string_view, 35> kKeywords = {
        "False", "None",   "True",    "and",      "as",       "assert", "async",
        "await", "break",  "class",   "continue", "def",      "del",    "elif",
        "else",  "except", "finally", "for",      "from",     "global", "if",
        "import", "in",    "is",      "lambda",   "nonlocal", "not",    "or",
        "pass",  "raise",  "return",  "try",      "while",    "with",   "yield"};
    return std::find(kKeywords.begin(), kKeywords.end(), w) != kKeywords.end();
}

/// Keyword constants that behave like literal values in argument position.
inline bool is_constant_keyword(std::string_view w) { return w == "None" || w == "True" || w == "False"; }

namespace detail {

inline bool is_string_prefix(std::string_view p) {
    if (p.empty() || p.size() > 2)
        return false;
    for (char c : p) {
        char l = static_cast<char>(c | 0x20);
        if (l != 'r' && l != 'b' && l != 'u' && l != 'f')
            return false;
    }
    return true;
}

inline std::size_t scan_string(std::string_view src, std::size_t quote_pos) {
    const char q = src[quote_pos];
    const bool triple = quote_pos + 2 < src.size() && src[quote_pos + 1] == q && src[quote_pos + 2] == q;
    std::size_t i = quote_pos + (triple ? 3 : 1);
    while (i < src.size()) {
        if (src[i] == '\\') {
            i += 2;
            continue;
        }
        if (src[i] == q) {
            if (!triple)
                return i + 1;
            if (i + 2 < src.size() && src[i + 1] == q && src[i + 2] == q)
                return i + 3;
        }
        ++i;
    }
    return src.size();
}

} // namespace detail

inline std::vector<Token> tokenize(std::string_view src) {
    static constexpr std::array<std::string_view, 24> kOps = {
        "**=", "//=", ">>=", "<<=", "...", "==", "!=", "<=", ">=", "+=", "-=", "*=",
        "/=",  "%=",  "&=",  "|=",  "^=",  "->", ":=", "**", "//", "<<", ">>", "@="};
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = src.size();
    while (i < n) {
        const char c = src[i];
        const std::size_t start = i;
        if (c == '\\' && i + 1 < n && src[i + 1] == 'n') {
            out.push_back({Kind::Newline, start, i + 2});
            i += 2;
        } else if (c == ' ' || c == '\t' || c == '\f' || c == '\v') {
            while (i < n && (src[i] == ' ' || src[i] == '\t' || src[i] == '\f' || src[i] == '\v'))
                ++i;
            out.push_back({Kind::Space, start, i});
        } else if (c == '#') {
            std::size_t marker = src.find(kNewlineMarker, i);
            i = marker == std::string_view::npos ? n : marker;
            out.push_back({Kind::Comment, start, i});
        } else if (c == '"' || c == '\'') {
            i = detail::scan_string(src, i);
            out.push_back({Kind::String, start, i});
        } else if (is_ident_start(c)) {
            while (i < n && is_ident_char(src[i]))
                ++i;
            if (i < n && (src[i] == '"' || src[i] == '\'') && detail::is_string_prefix(src.substr(start, i - start))) {
                i = detail::scan_string(src, i);
                out.push_back({Kind::String, start, i});
            } else {
                out.push_back({Kind::Identifier, start, i});
            }
        } else if (c >= '0' && c <= '9') {
            while (i < n && (is_ident_char(src[i]) || src[i] == '.'))
                ++i;
            out.push_back({Kind::Number, start, i});
        } else {
            std::size_t len = 1;
            for (auto op : kOps) {
                if (src.substr(i, op.size()) == op) {
                    len = op.size();
                    break;
                }
            }
            i += len;
            out.push_back({Kind::Operator, start, i});
        }
    }
    return out;
}

} // namespace snipscan::lex
