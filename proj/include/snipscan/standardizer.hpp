#pragma once

// Replaces the identifiers and literals that act as function inputs and
// outputs with canonical placeholders var0..varN, so that snippets written
// with different names line up for similarity and pattern extraction.
//
// Extraction grammar, in first-occurrence order:
//   * assignment targets: bare identifiers (or comma-separated identifier
//     lists) directly left of a top-level `=`;
//   * call arguments: identifiers, string literals and None/True/False whose
//     innermost enclosing bracket is a call's (or def's) parentheses;
//   * the bare identifier after `return`.
// Keywords, attribute-qualified names (`request.args.get`, `x.attr`),
// callee names, keyword-argument names and existing placeholders are never
// extracted. Replacement is token-exact, so `name` never rewrites
// `make_response`, and string literals are replaced including their quotes.

#include <snipscan/corpus.hpp>
#include <snipscan/python_lexer.hpp>

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace snipscan {

struct StandardizedSnippet {
    std::size_t original_id = 0;
    std::string text;
    /// (placeholder, original token) in placeholder order.
    std::vector<std::pair<std::string, std::string>> mapping;

    friend bool operator==(const StandardizedSnippet&, const StandardizedSnippet&) = default;
};

namespace detail {

/// Index N when `word` is exactly `var` followed by decimal digits.
inline std::optional<std::size_t> placeholder_index(std::string_view word) {
    if (word.size() < 4 || !word.starts_with("var"))
        return std::nullopt;
    std::size_t value = 0;
    auto digits = word.substr(3);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size())
        return std::nullopt;
    return value;
}

class SignificantTokens {
public:
    explicit SignificantTokens(std::string_view src) : src_(src) {
        for (const auto& t : lex::tokenize(src))
            if (t.kind != lex::Kind::Space && t.kind != lex::Kind::Comment)
                toks_.push_back(t);
    }

    std::size_t size() const { return toks_.size(); }
    const lex::Token& operator[](std::size_t i) const { return toks_[i]; }
    std::string_view text(std::size_t i) const { return toks_[i].text(src_); }

    bool is_op(std::size_t i, std::string_view op) const {
        return i < toks_.size() && toks_[i].kind == lex::Kind::Operator && text(i) == op;
    }
    bool is_ident(std::size_t i) const { return i < toks_.size() && toks_[i].kind == lex::Kind::Identifier; }
    bool preceded_by_dot(std::size_t i) const { return i > 0 && is_op(i - 1, "."); }

private:
    std::string_view src_;
    std::vector<lex::Token> toks_;
};

/// Identifier token that names a plain variable: not a keyword, not an
/// attribute, not a placeholder.
inline bool is_plain_name(const SignificantTokens& t, std::size_t i) {
    if (!t.is_ident(i) || t.preceded_by_dot(i))
        return false;
    auto w = t.text(i);
    return !lex::is_keyword(w) && !placeholder_index(w);
}

} // namespace detail

/// Tokens to standardize, in first-occurrence order.
inline std::vector<std::string> extract_standardizable_tokens(std::string_view text) {
    detail::SignificantTokens t(text);
    std::vector<std::pair<std::size_t, std::string>> found; // (token position, text)

    struct Bracket {
        char open;
        bool call;
    };
    std::vector<Bracket> stack;

    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto kind = t[i].kind;
        const auto word = t.text(i);

        if (kind == lex::Kind::Newline)
            continue; // brackets span lines, as in Python
        if (kind == lex::Kind::Operator) {
            if (word == "(" || word == "[" || word == "{") {
                bool call = false;
                if (word == "(" && i > 0) {
                    const auto prev_kind = t[i - 1].kind;
                    const auto prev = t.text(i - 1);
                    if (prev_kind == lex::Kind::Identifier)
                        call = !lex::is_keyword(prev) && !(i >= 2 && t.text(i - 2) == "class");
                    else if (prev == ")" || prev == "]")
                        call = true;
                }
                stack.push_back({word[0], call});
            } else if (word == ")" || word == "]" || word == "}") {
                if (!stack.empty())
                    stack.pop_back();
            } else if (word == "=" && stack.empty()) {
                // walk back over `a` or `a, b, c`
                std::size_t j = i;
                while (j > 0 && detail::is_plain_name(t, j - 1)) {
                    found.emplace_back(j - 1, std::string(t.text(j - 1)));
                    if (j >= 2 && t.is_op(j - 2, ","))
                        j -= 2;
                    else
                        break;
                }
            }
            continue;
        }

        if (kind == lex::Kind::Identifier && word == "return" && i + 1 < t.size()) {
            const std::size_t k = i + 1;
            if (detail::is_plain_name(t, k) && !t.is_op(k + 1, "(") && !t.is_op(k + 1, ".") && !t.is_op(k + 1, "["))
                found.emplace_back(k, std::string(t.text(k)));
            continue;
        }

        if (stack.empty() || !stack.back().call)
            continue;
        const bool callee_or_attr_base = t.is_op(i + 1, "(") || t.is_op(i + 1, ".");
        const bool kwarg_name = t.is_op(i + 1, "=");
        if (callee_or_attr_base || kwarg_name)
            continue;
        if (kind == lex::Kind::String) {
            found.emplace_back(i, std::string(word));
        } else if (kind == lex::Kind::Identifier && !t.preceded_by_dot(i) && !detail::placeholder_index(word)) {
            if (!lex::is_keyword(word) || lex::is_constant_keyword(word))
                found.emplace_back(i, std::string(word));
        }
    }

    std::sort(found.begin(), found.end());
    std::vector<std::string> tokens;
    std::set<std::string, std::less<>> seen;
    for (auto& [pos, tok] : found)
        if (seen.insert(tok).second)
            tokens.push_back(std::move(tok));
    return tokens;
}

inline std::vector<std::string> extract_standardizable_tokens(const Snippet& snippet) {
    return extract_standardizable_tokens(snippet.text);
}

namespace detail {

inline bool is_wordlike(const lex::Token& t) {
    return t.kind == lex::Kind::Identifier || t.kind == lex::Kind::Number || t.kind == lex::Kind::String;
}

/// Rewrites identifier and string tokens through `lookup`; everything else
/// is copied byte for byte. Attribute names are left alone, and so is a
/// token glued to another name, number or string (`a's'`, `"t""u"`), since
/// a placeholder there would merge with its neighbour and could not be undone.
template <typename Lookup>
std::string rewrite_tokens(std::string_view src, Lookup&& lookup) {
    std::string out;
    out.reserve(src.size());
    const auto toks = lex::tokenize(src);
    std::optional<std::size_t> prev_significant;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto& tok = toks[i];
        const auto word = tok.text(src);
        const bool after_dot = prev_significant && toks[*prev_significant].kind == lex::Kind::Operator &&
                               toks[*prev_significant].text(src) == ".";
        const std::string* replacement = nullptr;
        const bool touching = (i > 0 && is_wordlike(toks[i - 1])) || (i + 1 < toks.size() && is_wordlike(toks[i + 1]));
        if ((tok.kind == lex::Kind::Identifier || tok.kind == lex::Kind::String) && !after_dot && !touching)
            replacement = lookup(word);
        out += replacement ? std::string_view(*replacement) : word;
        if (tok.kind != lex::Kind::Space && tok.kind != lex::Kind::Comment)
            prev_significant = i;
    }
    return out;
}

} // namespace detail

inline StandardizedSnippet standardize(const Snippet& snippet) {
    StandardizedSnippet result;
    result.original_id = snippet.id;

    // Placeholder-shaped identifiers already in the text keep their meaning;
    // fresh indices skip them so the rewrite stays reversible.
    std::set<std::size_t> reserved;
    for (const auto& tok : lex::tokenize(snippet.text))
        if (tok.kind == lex::Kind::Identifier)
            if (auto idx = detail::placeholder_index(tok.text(snippet.text)))
                reserved.insert(*idx);

    std::size_t next = 0;
    for (auto& token : extract_standardizable_tokens(snippet.text)) {
        while (reserved.contains(next))
            ++next;
        result.mapping.emplace_back("var" + std::to_string(next++), std::move(token));
    }

    result.text = detail::rewrite_tokens(snippet.text, [&](std::string_view word) -> const std::string* {
        for (const auto& [placeholder, original] : result.mapping)
            if (original == word)
                return &placeholder;
        return nullptr;
    });
    return result;
}

inline StandardizedSnippet standardize(std::string_view text, std::size_t id = 0) {
    return standardize(Snippet(id, std::string(text)));
}

/// Applies the mapping in reverse, reproducing the original snippet text.
inline std::string destandardize(const StandardizedSnippet& s) {
    return detail::rewrite_tokens(s.text, [&](std::string_view word) -> const std::string* {
        for (const auto& [placeholder, original] : s.mapping)
            if (placeholder == word)
                return &original;
        return nullptr;
    });
}

} // namespace snipscan
