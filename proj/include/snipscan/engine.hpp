#pragma once

// Runs every rule of a catalog against every snippet. There is no
// short-circuit: a snippet keeps collecting findings after the first hit,
// since one fragment can carry several weaknesses from different categories.

#include <snipscan/corpus.hpp>
#include <snipscan/rules.hpp>
#include <snipscan/taxonomy.hpp>

#include <boost/regex.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace snipscan {

struct Finding {
    std::size_t snippet_id = 0;
    std::string rule_id;
    OwaspCategory category = OwaspCategory::Injection;
    std::vector<std::string> cwe_ids;
    std::string matched_fragment;
    std::optional<std::string> flow_variable;

    friend bool operator==(const Finding&, const Finding&) = default;
};

struct SnippetVerdict {
    std::size_t snippet_id = 0;
    std::vector<Finding> findings;
    std::vector<OwaspCategory> categories; ///< canonical order, no duplicates
    double elapsed_s = 0.0;

    bool unsafe() const noexcept { return !findings.empty(); }
};

struct ScanResult {
    std::vector<SnippetVerdict> verdicts;
    double total_scan_s = 0.0; ///< sum of per-snippet times
    double wall_s = 0.0;       ///< elapsed wall time of the whole scan
};

namespace detail {

struct Span {
    std::size_t begin;
    std::size_t end;
    bool overlaps(std::size_t b, std::size_t e) const { return b < end && begin < e; }
};

/// The text rules are matched against: newline markers decoded to real line
/// breaks, so `\b` and `^` behave at line starts. `origin[i]` is the offset
/// in the encoded snippet of decoded position i.
struct ScanView {
    std::string_view encoded;
    std::string text;
    std::vector<std::size_t> origin;

    explicit ScanView(std::string_view enc) : encoded(enc) {
        text.reserve(enc.size());
        origin.reserve(enc.size() + 1);
        for (std::size_t i = 0; i < enc.size(); ++i) {
            origin.push_back(i);
            if (enc[i] == '\\' && i + 1 < enc.size() && enc[i + 1] == 'n') {
                text.push_back('\n');
                ++i;
            } else {
                text.push_back(enc[i]);
            }
        }
        origin.push_back(enc.size());
    }

    std::string fragment(std::size_t begin, std::size_t end) const {
        return std::string(encoded.substr(origin[begin], origin[end] - origin[begin]));
    }
};

/// Start of the statement holding `pos`: just after the last line break or
/// `;` before it.
inline std::size_t statement_start(std::string_view text, std::size_t pos) {
    for (std::size_t i = pos; i-- > 0;)
        if (text[i] == ';' || text[i] == '\n')
            return i + 1;
    return 0;
}

inline bool is_word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           static_cast<unsigned char>(c) >= 0x80;
}

/// Name bound by the assignment whose right-hand side contains `pos`: the
/// identifier right before the last top-level `=` of the statement prefix.
inline std::optional<std::string> assigned_variable(std::string_view text, std::size_t pos) {
    const std::size_t start = statement_start(text, pos);
    int depth = 0;
    std::optional<std::size_t> eq;
    char quote = 0;
    for (std::size_t i = start; i < pos; ++i) {
        const char c = text[i];
        if (quote) {
            if (c == '\\')
                ++i;
            else if (c == quote)
                quote = 0;
            continue;
        }
        if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '(' || c == '[' || c == '{') {
            ++depth;
        } else if (c == ')' || c == ']' || c == '}') {
            depth = std::max(0, depth - 1);
        } else if (c == '=' && depth == 0) {
            const char prev = i > 0 ? text[i - 1] : '\0';
            const char next = i + 1 < text.size() ? text[i + 1] : '\0';
            if (next == '=') {
                ++i;
                continue;
            }
            if (prev == '=' || prev == '!' || prev == '<' || prev == '>' || prev == ':' || prev == '+' ||
                prev == '-' || prev == '*' || prev == '/' || prev == '%' || prev == '&' || prev == '|' ||
                prev == '^' || prev == '@')
                continue;
            eq = i;
        }
    }
    if (!eq)
        return std::nullopt;
    std::size_t end = *eq;
    while (end > start && (text[end - 1] == ' ' || text[end - 1] == '\t'))
        --end;
    std::size_t begin = end;
    while (begin > start && is_word_char(text[begin - 1]))
        --begin;
    if (begin == end || (text[begin] >= '0' && text[begin] <= '9'))
        return std::nullopt;
    return std::string(text.substr(begin, end - begin));
}

/// End of the call whose opening parenthesis is at `open - 1`.
inline std::size_t call_end(std::string_view text, std::size_t open) {
    int depth = 1;
    char quote = 0;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (quote) {
            if (c == '\\')
                ++i;
            else if (c == quote)
                quote = 0;
            continue;
        }
        if (c == '"' || c == '\'')
            quote = c;
        else if (c == '(')
            ++depth;
        else if (c == ')' && --depth == 0)
            return i + 1;
    }
    return text.size();
}

inline bool search(const boost::regex& re, std::string_view text) {
    return boost::regex_search(text.begin(), text.end(), re);
}

inline std::optional<Finding> evaluate_simple(const DetectionRule& rule, const CompiledRule& c,
                                              const ScanView& view) {
    const std::string_view text = view.text;
    boost::match_results<std::string_view::const_iterator> m;
    if (!boost::regex_search(text.begin(), text.end(), m, *c.trigger))
        return std::nullopt;
    for (const auto& ex : c.excludes)
        if (search(*ex, text))
            return std::nullopt;
    Finding f;
    f.rule_id = rule.rule_id;
    f.category = rule.category;
    f.cwe_ids = rule.cwe_ids;
    const auto b = static_cast<std::size_t>(m.position(std::size_t{0}));
    f.matched_fragment = view.fragment(b, b + static_cast<std::size_t>(m.length(std::size_t{0})));
    return f;
}

inline std::optional<Finding> evaluate_source_sink(const DetectionRule& rule, const CompiledRule& c,
                                                   const ScanView& view) {
    const std::string_view text = view.text;
    using It = std::string_view::const_iterator;
    for (boost::regex_iterator<It> it(text.begin(), text.end(), *c.trigger), last; it != last; ++it) {
        const auto& m = *it;
        const std::size_t match_begin = static_cast<std::size_t>(m.position(std::size_t{0}));
        const std::size_t match_end = match_begin + static_cast<std::size_t>(m.length(std::size_t{0}));
        auto var = assigned_variable(text, match_begin);
        if (!var)
            continue;
        const Span source{match_begin, call_end(text, match_end)};

        const boost::regex sink(replace_all(c.sink_template, kVarPlaceholder, *var), boost::regex::perl);
        bool sunk = false;
        for (boost::regex_iterator<It> s(text.begin(), text.end(), sink); s != last && !sunk; ++s) {
            const std::size_t b = static_cast<std::size_t>(s->position(std::size_t{0}));
            sunk = !source.overlaps(b, b + static_cast<std::size_t>(s->length(std::size_t{0})));
        }
        if (!sunk)
            continue;

        bool sanitized = false;
        for (const auto& tmpl : c.exclude_templates) {
            if (search(boost::regex(replace_all(tmpl, kVarPlaceholder, *var), boost::regex::perl), text)) {
                sanitized = true;
                break;
            }
        }
        if (sanitized)
            continue;

        Finding f;
        f.rule_id = rule.rule_id;
        f.category = rule.category;
        f.cwe_ids = rule.cwe_ids;
        f.matched_fragment = view.fragment(match_begin, match_end);
        f.flow_variable = std::move(var);
        return f;
    }
    return std::nullopt;
}

} // namespace detail

namespace detail {

inline std::optional<Finding> evaluate_rule(const DetectionRule& rule, const CompiledRule& compiled,
                                            const ScanView& view) {
    return rule.kind == RuleKind::Simple ? evaluate_simple(rule, compiled, view)
                                         : evaluate_source_sink(rule, compiled, view);
}

} // namespace detail

/// Evaluates one rule on one single-line snippet text; the snippet id of the
/// result is unset.
inline std::optional<Finding> evaluate_rule(const DetectionRule& rule, const CompiledRule& compiled,
                                            std::string_view text) {
    return detail::evaluate_rule(rule, compiled, detail::ScanView(text));
}

inline SnippetVerdict scan_snippet(const Snippet& snippet, const RuleSet& ruleset) {
    const auto t0 = std::chrono::steady_clock::now();
    SnippetVerdict v;
    v.snippet_id = snippet.id;
    const detail::ScanView view(snippet.text);
    for (std::size_t i = 0; i < ruleset.size(); ++i) {
        if (auto f = detail::evaluate_rule(ruleset.rules()[i], ruleset.compiled(i), view)) {
            f->snippet_id = snippet.id;
            v.categories.push_back(f->category);
            v.findings.push_back(std::move(*f));
        }
    }
    v.categories = canonical_order(std::move(v.categories));
    v.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return v;
}

/// Scans a corpus, optionally on several threads. Verdicts come back in
/// corpus order whatever the degree of parallelism.
inline ScanResult scan_corpus(const Corpus& corpus, const RuleSet& ruleset, std::size_t jobs = 1) {
    const auto t0 = std::chrono::steady_clock::now();
    ScanResult result;
    result.verdicts.resize(corpus.size());
    jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, corpus.size()));

    if (jobs == 1) {
        for (std::size_t i = 0; i < corpus.size(); ++i)
            result.verdicts[i] = scan_snippet(corpus.snippets[i], ruleset);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> workers;
        workers.reserve(jobs);
        for (std::size_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < corpus.size(); i = next++)
                    result.verdicts[i] = scan_snippet(corpus.snippets[i], ruleset);
            });
        }
    }

    for (const auto& v : result.verdicts)
        result.total_scan_s += v.elapsed_s;
    result.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

} // namespace snipscan
