#pragma once

// Candidate pattern mining over a labeled corpus, and draft-rule lifting.
//
// Labels file, one line per snippet:  <id>\t<category>\t<cwe,cwe,...>
// Candidates file, one line per pair: <category>\t<similarity>\t<id>,<id>\t<pattern>

#include <snipscan/corpus.hpp>
#include <snipscan/engine.hpp>
#include <snipscan/error.hpp>
#include <snipscan/rules.hpp>
#include <snipscan/simlcs.hpp>
#include <snipscan/standardizer.hpp>
#include <snipscan/taxonomy.hpp>
#include <snipscan/text.hpp>

#include <boost/regex.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace snipscan {

struct LabeledSnippet {
    Snippet snippet;
    OwaspCategory category = OwaspCategory::Injection;
    std::vector<std::string> cwe_ids;
};

struct CandidatePattern {
    std::string pattern_text;
    OwaspCategory category = OwaspCategory::Injection;
    std::pair<std::size_t, std::size_t> source_pair; ///< lower id first
    double pair_similarity = 0.0;
    std::vector<std::string> cwe_ids; ///< union of both labels, taxonomy order

    friend bool operator==(const CandidatePattern&, const CandidatePattern&) = default;
};

struct SnippetLabel {
    OwaspCategory category = OwaspCategory::Injection;
    std::vector<std::string> cwe_ids;
};

inline std::map<std::size_t, SnippetLabel> parse_labels(std::string_view content,
                                                         const std::string& origin = "<memory>") {
    std::map<std::size_t, SnippetLabel> out;
    const auto lines = text::split_lines(content);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const std::size_t lineno = n + 1;
        if (lines[n].empty())
            continue;
        const auto fields = text::split(lines[n], '\t');
        if (fields.size() != 3)
            throw ParseError(origin, lineno, "expected <id>\\t<category>\\t<cwes>");
        std::size_t id = 0;
        auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), id);
        if (ec != std::errc{} || ptr != fields[0].data() + fields[0].size() || fields[0].empty())
            throw ParseError(origin, lineno, "bad snippet id '" + std::string(fields[0]) + "'");
        auto cat = parse_category(fields[1]);
        if (!cat)
            throw ParseError(origin, lineno, "unknown category '" + std::string(fields[1]) + "'");
        SnippetLabel label{*cat, {}};
        if (fields[2].empty())
            throw ParseError(origin, lineno, "at least one CWE id is required");
        for (auto cwe : text::split(fields[2], ',')) {
            auto owner = category_of_cwe(cwe);
            if (!owner)
                throw ParseError(origin, lineno, std::string(cwe) + " is not part of the taxonomy");
            if (*owner != *cat)
                throw ParseError(origin, lineno, std::string(cwe) + " does not belong to " + std::string(fields[1]));
            label.cwe_ids.emplace_back(cwe);
        }
        if (!out.emplace(id, std::move(label)).second)
            throw ParseError(origin, lineno, "duplicate snippet id " + std::to_string(id));
    }
    return out;
}

/// Pairs every snippet with its label; both sides must cover the same ids.
inline std::vector<LabeledSnippet> label_corpus(const Corpus& corpus,
                                                const std::map<std::size_t, SnippetLabel>& labels) {
    std::vector<LabeledSnippet> out;
    for (const auto& s : corpus.snippets) {
        auto it = labels.find(s.id);
        if (it == labels.end())
            throw ValidationError("snippet " + std::to_string(s.id) + " has no label");
        out.push_back({s, it->second.category, it->second.cwe_ids});
    }
    if (labels.size() != corpus.size())
        throw ValidationError("labels name snippets that are not in the corpus");
    return out;
}

inline std::vector<LabeledSnippet> load_labeled_corpus(const std::filesystem::path& corpus_path,
                                                       const std::filesystem::path& labels_path) {
    return label_corpus(load_snippets(corpus_path),
                        parse_labels(text::read_utf8_file(labels_path), labels_path.string()));
}

namespace detail {

/// Pair similarity as the miner sees it: markers become real line breaks,
/// which are junk for block matching.
inline double mining_similarity(std::string_view a, std::string_view b) {
    return similarity_ratio(decode_newline_markers(a), decode_newline_markers(b), {U'\n'}).value;
}

inline std::vector<std::string> merge_cwes(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::string> out;
    for (const auto& e : kCweTaxonomy) {
        const auto in = [&e](const std::vector<std::string>& v) {
            return std::find(v.begin(), v.end(), e.id) != v.end();
        };
        if (in(a) || in(b))
            out.emplace_back(e.id);
    }
    return out;
}

} // namespace detail

/// Per category, every unordered pair whose standardized similarity exceeds
/// `threshold` yields one candidate holding the LCS of the pair.
inline std::vector<CandidatePattern> mine_patterns(const std::vector<LabeledSnippet>& corpus,
                                                   double threshold = 0.5) {
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw ValidationError("threshold must lie in [0, 1]");
    if (corpus.empty())
        throw ValidationError("cannot mine an empty corpus");

    std::vector<StandardizedSnippet> std_texts;
    std_texts.reserve(corpus.size());
    for (const auto& ls : corpus)
        std_texts.push_back(standardize(ls.snippet));

    std::vector<CandidatePattern> out;
    LcsSolver<char32_t> solver;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        for (std::size_t j = i + 1; j < corpus.size(); ++j) {
            if (corpus[i].category != corpus[j].category)
                continue;
            // Lower id first, so a pair always scores the same way round.
            const bool swap = corpus[j].snippet.id < corpus[i].snippet.id;
            const std::size_t lo = swap ? j : i, hi = swap ? i : j;
            const auto& a = std_texts[lo].text;
            const auto& b = std_texts[hi].text;
            const double sim = detail::mining_similarity(a, b);
            if (!(sim > threshold))
                continue;

            const auto ua = text::decode_utf8(a);
            const auto ub = text::decode_utf8(b);
            auto common = solver.solve(ua, ub);
            if (!is_subsequence<char32_t>(common.content, ua) || !is_subsequence<char32_t>(common.content, ub))
                throw Error("internal: mined pattern is not a subsequence of its sources");

            CandidatePattern c;
            c.pattern_text = text::encode_utf8(std::u32string_view(common.content.data(), common.content.size()));
            c.category = corpus[i].category;
            c.source_pair = {corpus[lo].snippet.id, corpus[hi].snippet.id};
            c.pair_similarity = sim;
            c.cwe_ids = detail::merge_cwes(corpus[lo].cwe_ids, corpus[hi].cwe_ids);
            out.push_back(std::move(c));
        }
    }
    std::sort(out.begin(), out.end(), [](const CandidatePattern& x, const CandidatePattern& y) {
        if (x.category != y.category)
            return index_of(x.category) < index_of(y.category);
        if (x.pair_similarity != y.pair_similarity)
            return x.pair_similarity > y.pair_similarity;
        return x.source_pair < y.source_pair;
    });
    return out;
}

inline std::string format_candidate(const CandidatePattern& c) {
    char sim[32];
    std::snprintf(sim, sizeof sim, "%.4f", c.pair_similarity);
    return std::string(to_string(c.category)) + "\t" + sim + "\t" + std::to_string(c.source_pair.first) + "," +
           std::to_string(c.source_pair.second) + "\t" + c.pattern_text + "\n";
}

inline std::string format_candidates(const std::vector<CandidatePattern>& cs) {
    std::string out;
    for (const auto& c : cs)
        out += format_candidate(c);
    return out;
}

// ---------------------------------------------------------------------------
// Draft rules

struct Rejection {
    std::string reason;
};

using DraftResult = std::variant<DetectionRule, Rejection>;

inline constexpr std::size_t kMinLiteralRun = 4;

namespace detail {

/// Source calls the lifting heuristic recognizes, as literal text.
inline const std::vector<std::string>& known_sources() {
    static const std::vector<std::string> kSources = {
        "request.args.get(",    "request.form.get(",  "request.values.get(", "request.cookies.get(",
        "request.headers.get(", "request.get_json(",  "request.get_data(",   "input(",
    };
    return kSources;
}

inline std::string regex_escape(std::string_view s) {
    static const std::string_view kSpecial = R"(\^$.|?*+()[]{}/)";
    std::string out;
    bool in_space = false;
    for (char c : s) {
        if (text::is_space(c)) {
            if (!in_space)
                out += "\\s*";
            in_space = true;
            continue;
        }
        in_space = false;
        if (kSpecial.find(c) != std::string_view::npos)
            out += '\\';
        out += c;
    }
    return out;
}

struct PatternPiece {
    bool placeholder = false;
    std::string text;
};

/// Splits a pattern into literal runs and `var#` placeholders.
inline std::vector<PatternPiece> split_placeholders(std::string_view p) {
    std::vector<PatternPiece> out;
    const auto word = [](char c) { return is_word_char(c); };
    std::size_t i = 0;
    std::string literal;
    while (i < p.size()) {
        if (word(p[i]) && (i == 0 || !word(p[i - 1]))) {
            std::size_t e = i;
            while (e < p.size() && word(p[e]))
                ++e;
            if (placeholder_index(p.substr(i, e - i))) {
                if (!literal.empty())
                    out.push_back({false, std::exchange(literal, {})});
                out.push_back({true, std::string(p.substr(i, e - i))});
                i = e;
                continue;
            }
            literal += p.substr(i, e - i);
            i = e;
            continue;
        }
        literal += p[i++];
    }
    if (!literal.empty())
        out.push_back({false, literal});
    return out;
}

inline std::size_t literal_weight(std::string_view s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return !text::is_space(c); }));
}

inline std::string category_slug(OwaspCategory c) {
    std::string out;
    for (char ch : to_string(c)) {
        if (ch == ' ')
            out += '-';
        else
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    return out;
}

/// Looks for `varN = <source>(` followed later by a parenthesized use of varN.
inline std::optional<std::string> source_sink_trigger(std::string_view pattern) {
    for (const auto& src : known_sources()) {
        for (std::size_t pos = pattern.find(src); pos != std::string_view::npos; pos = pattern.find(src, pos + 1)) {
            if (pos > 0 && is_word_char(pattern[pos - 1]))
                continue;
            auto var = assigned_variable(pattern, pos);
            if (!var || !placeholder_index(*var))
                continue;
            const std::size_t after = call_end(pattern, pos + src.size());
            const boost::regex reuse(R"(\([^()]*\b)" + *var + R"(\b[^()]*\))");
            const auto rest = pattern.substr(after);
            if (boost::regex_search(rest.begin(), rest.end(), reuse))
                return regex_escape(src);
        }
    }
    return std::nullopt;
}

} // namespace detail

/// Lifts a candidate into a draft rule for human review, or says why not.
inline DraftResult suggest_rule(const CandidatePattern& c) {
    const auto pieces = detail::split_placeholders(c.pattern_text);
    std::size_t literal_total = 0;
    for (const auto& p : pieces)
        if (!p.placeholder)
            literal_total += detail::literal_weight(p.text);
    if (literal_total < kMinLiteralRun)
        return Rejection{"pattern too short: " + std::to_string(literal_total) + " literal characters, need " +
                         std::to_string(kMinLiteralRun)};

    DetectionRule r;
    r.rule_id = "draft-" + detail::category_slug(c.category) + "-" + std::to_string(c.source_pair.first) + "-" +
                std::to_string(c.source_pair.second);
    r.category = c.category;
    r.cwe_ids = c.cwe_ids;
    r.review_required = true;
    r.description = "drafted from snippets " + std::to_string(c.source_pair.first) + " and " +
                    std::to_string(c.source_pair.second);

    if (auto trigger = detail::source_sink_trigger(c.pattern_text)) {
        r.kind = RuleKind::SourceSink;
        r.trigger = *trigger;
        r.sink_template = std::string(kDefaultSinkTemplate);
        return r;
    }

    // Element kinds: 0 literal, 1 identifier wildcard, 2 gap.
    std::vector<std::pair<int, std::string>> parts;
    for (const auto& p : pieces) {
        if (p.placeholder) {
            parts.emplace_back(1, R"(\w+)");
        } else if (text::trim(p.text).size() >= kMinLiteralRun) {
            parts.emplace_back(0, detail::regex_escape(text::trim(p.text)));
        } else if (parts.empty() || parts.back().first != 2) {
            parts.emplace_back(2, ".*?");
        }
    }
    while (!parts.empty() && parts.front().first != 0)
        parts.erase(parts.begin());
    while (!parts.empty() && parts.back().first != 0)
        parts.pop_back();
    if (parts.empty())
        return Rejection{"no literal run of " + std::to_string(kMinLiteralRun) + " or more characters"};

    r.kind = RuleKind::Simple;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        // Separating whitespace between pieces was trimmed; allow it back.
        if (k > 0 && parts[k].first != 2 && parts[k - 1].first != 2)
            r.trigger += R"(\s*)";
        r.trigger += parts[k].second;
    }
    return r;
}

/// Drafts in catalog syntax, each preceded by a review marker.
inline std::string format_drafts(const std::vector<DetectionRule>& drafts) {
    std::string out;
    for (const auto& d : drafts)
        out += "# review required\n" + format_rule(d) + "\n";
    return out;
}

} // namespace snipscan
