#pragma once

// Detection rules and the line-oriented catalog format.
//
// A catalog is UTF-8 text. Lines starting with `#` are comments. A record is
// a run of `key=value` lines ended by a blank line (or end of file):
//
//   id=sdif-yaml-load
//   kind=simple
//   category=Software and Data Integrity Failures
//   cwes=CWE-502
//   trigger=\byaml\.load\(
//   exclude=Loader\s*=\s*SafeLoader
//   desc=...
//
// Required keys: id, kind (simple | source-sink), category, cwes, trigger.
// Optional: sink (source-sink only, must contain {VAR} once), exclude
// (repeatable), desc. A record holding only `version=...` sets the catalog
// version. Values are taken verbatim after the first `=`.

#include <snipscan/error.hpp>
#include <snipscan/taxonomy.hpp>
#include <snipscan/text.hpp>

#include <boost/regex.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace snipscan {

enum class RuleKind { Simple, SourceSink };

inline constexpr std::string_view to_string(RuleKind k) {
    return k == RuleKind::Simple ? "simple" : "source-sink";
}

inline constexpr std::string_view kVarPlaceholder = "{VAR}";
inline constexpr std::string_view kDefaultSinkTemplate = R"(\([^()]*\b{VAR}\b[^()]*\))";

/// Excludes applied to Injection source-sink rules that declare none.
inline const std::vector<std::string>& default_injection_excludes() {
    static const std::vector<std::string> kExcludes = {R"(escape\()", R"(quote\()", R"(literal_eval\()"};
    return kExcludes;
}

struct DetectionRule {
    std::string rule_id;
    RuleKind kind = RuleKind::Simple;
    OwaspCategory category = OwaspCategory::Injection;
    std::vector<std::string> cwe_ids;
    std::string trigger;
    std::optional<std::string> sink_template;
    std::vector<std::string> sanitizer_excludes;
    std::string description;
    bool review_required = false; ///< set on machine-drafted rules; not serialized

    friend bool operator==(const DetectionRule& a, const DetectionRule& b) {
        return a.rule_id == b.rule_id && a.kind == b.kind && a.category == b.category && a.cwe_ids == b.cwe_ids &&
               a.trigger == b.trigger && a.sink_template == b.sink_template &&
               a.sanitizer_excludes == b.sanitizer_excludes && a.description == b.description;
    }
};

namespace detail {

inline std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
        s.replace(pos, from.size(), to);
    return s;
}

inline std::size_t count_occurrences(std::string_view s, std::string_view needle) {
    std::size_t n = 0;
    for (std::size_t pos = 0; (pos = s.find(needle, pos)) != std::string_view::npos; pos += needle.size())
        ++n;
    return n;
}

/// Constructs outside the portable subset: backreferences and lookaround.
inline std::optional<std::string> non_portable_construct(std::string_view re) {
    for (std::size_t i = 0; i < re.size(); ++i) {
        if (re[i] == '\\' && i + 1 < re.size()) {
            const char e = re[i + 1];
            if ((e >= '1' && e <= '9') || e == 'k' || e == 'g')
                return "backreference";
            ++i;
            continue;
        }
        if (re.substr(i, 3) == "(?=" || re.substr(i, 3) == "(?!" || re.substr(i, 4) == "(?<=" ||
            re.substr(i, 4) == "(?<!" || re.substr(i, 3) == "(?>")
            return "lookaround or atomic group";
    }
    return std::nullopt;
}

inline std::shared_ptr<const boost::regex> compile(const std::string& pattern, const std::string& rule_id,
                                                   std::string_view field) {
    if (auto bad = non_portable_construct(pattern))
        throw ValidationError("rule " + rule_id + ": " + std::string(field) + " uses unsupported " + *bad + ": " +
                              pattern);
    try {
        return std::make_shared<const boost::regex>(pattern, boost::regex::perl);
    } catch (const boost::regex_error& e) {
        throw ValidationError("rule " + rule_id + ": " + std::string(field) + " does not compile (" + e.what() +
                              "): " + pattern);
    }
}

/// A source-sink exclude without {VAR} is read as "this call wraps the
/// flowed variable".
inline std::string exclude_template(const std::string& exclude) {
    if (exclude.find(kVarPlaceholder) != std::string::npos)
        return exclude;
    return "(?:" + exclude + R"()[^()]*\b{VAR}\b)";
}

} // namespace detail

/// A rule with its regular expressions compiled once.
struct CompiledRule {
    std::shared_ptr<const boost::regex> trigger;
    std::vector<std::shared_ptr<const boost::regex>> excludes; ///< Simple rules only
    std::string sink_template;                                 ///< SourceSink rules only
    std::vector<std::string> exclude_templates;                ///< SourceSink rules only, contain {VAR}
};

/// Checks every per-rule invariant and compiles the rule's expressions.
inline CompiledRule compile_rule(const DetectionRule& r) {
    if (r.rule_id.empty())
        throw ValidationError("rule with empty id");
    if (r.cwe_ids.empty())
        throw ValidationError("rule " + r.rule_id + ": no CWE ids");
    for (const auto& cwe : r.cwe_ids) {
        auto owner = category_of_cwe(cwe);
        if (!owner)
            throw ValidationError("rule " + r.rule_id + ": " + cwe + " is not part of the taxonomy");
        if (*owner != r.category)
            throw ValidationError("rule " + r.rule_id + ": " + cwe + " belongs to " + std::string(to_string(*owner)) +
                                  ", not " + std::string(to_string(r.category)));
    }
    if (r.trigger.empty())
        throw ValidationError("rule " + r.rule_id + ": empty trigger");

    CompiledRule c;
    c.trigger = detail::compile(r.trigger, r.rule_id, "trigger");
    if (r.kind == RuleKind::Simple) {
        if (r.sink_template)
            throw ValidationError("rule " + r.rule_id + ": simple rules take no sink");
        for (const auto& ex : r.sanitizer_excludes) {
            if (ex.find(kVarPlaceholder) != std::string::npos)
                throw ValidationError("rule " + r.rule_id + ": simple rule exclude cannot use {VAR}");
            c.excludes.push_back(detail::compile(ex, r.rule_id, "exclude"));
        }
        return c;
    }

    if (!r.trigger.ends_with("\\("))
        throw ValidationError("rule " + r.rule_id + ": source-sink trigger must end with an opening parenthesis");
    c.sink_template = r.sink_template.value_or(std::string(kDefaultSinkTemplate));
    if (detail::count_occurrences(c.sink_template, kVarPlaceholder) != 1)
        throw ValidationError("rule " + r.rule_id + ": sink must contain {VAR} exactly once");
    detail::compile(detail::replace_all(c.sink_template, kVarPlaceholder, "v"), r.rule_id, "sink");
    for (const auto& ex : r.sanitizer_excludes) {
        c.exclude_templates.push_back(detail::exclude_template(ex));
        detail::compile(detail::replace_all(c.exclude_templates.back(), kVarPlaceholder, "v"), r.rule_id, "exclude");
    }
    return c;
}

class RuleSet {
public:
    RuleSet() = default;

    /// Validates and compiles every rule; ids must be unique.
    explicit RuleSet(std::vector<DetectionRule> rules, std::string version = "") : version_(std::move(version)) {
        std::set<std::string, std::less<>> ids;
        compiled_.reserve(rules.size());
        for (const auto& r : rules) {
            if (!ids.insert(r.rule_id).second)
                throw ValidationError("duplicate rule id " + r.rule_id);
            compiled_.push_back(compile_rule(r));
        }
        rules_ = std::move(rules);
    }

    const std::vector<DetectionRule>& rules() const noexcept { return rules_; }
    const CompiledRule& compiled(std::size_t i) const { return compiled_.at(i); }
    const std::string& version() const noexcept { return version_; }
    std::size_t size() const noexcept { return rules_.size(); }
    bool empty() const noexcept { return rules_.empty(); }

    friend bool operator==(const RuleSet& a, const RuleSet& b) {
        return a.version_ == b.version_ && a.rules_ == b.rules_;
    }

private:
    std::vector<DetectionRule> rules_;
    std::vector<CompiledRule> compiled_;
    std::string version_;
};

// ---------------------------------------------------------------------------
// Catalog text format

inline std::string format_rule(const DetectionRule& r) {
    std::string out;
    out += "id=" + r.rule_id + "\n";
    out += "kind=" + std::string(to_string(r.kind)) + "\n";
    out += "category=" + std::string(to_string(r.category)) + "\n";
    out += "cwes=";
    for (std::size_t i = 0; i < r.cwe_ids.size(); ++i)
        out += (i ? "," : "") + r.cwe_ids[i];
    out += "\n";
    out += "trigger=" + r.trigger + "\n";
    if (r.sink_template)
        out += "sink=" + *r.sink_template + "\n";
    for (const auto& ex : r.sanitizer_excludes)
        out += "exclude=" + ex + "\n";
    if (!r.description.empty())
        out += "desc=" + r.description + "\n";
    return out;
}

inline std::string format_ruleset(const RuleSet& rs) {
    std::string out;
    if (!rs.version().empty())
        out += "version=" + rs.version() + "\n\n";
    for (const auto& r : rs.rules())
        out += format_rule(r) + "\n";
    return out;
}

/// FNV-1a over the canonical serialization; equal rule sets hash equal.
inline std::uint64_t fingerprint(const RuleSet& rs) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : format_ruleset(rs)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace detail {

struct PendingRecord {
    std::size_t first_line = 0;
    std::map<std::string, std::pair<std::string, std::size_t>, std::less<>> single; // key -> (value, line)
    std::vector<std::string> excludes;
    bool empty() const { return single.empty() && excludes.empty(); }
};

inline DetectionRule build_rule(const PendingRecord& rec, const std::string& origin) {
    auto require = [&](std::string_view key) -> const std::pair<std::string, std::size_t>& {
        auto it = rec.single.find(key);
        if (it == rec.single.end())
            throw ParseError(origin, rec.first_line, "record is missing required key '" + std::string(key) + "'");
        return it->second;
    };

    DetectionRule r;
    r.rule_id = require("id").first;
    if (r.rule_id.empty())
        throw ParseError(origin, require("id").second, "empty rule id");

    const auto& [kind, kind_line] = require("kind");
    if (kind == "simple")
        r.kind = RuleKind::Simple;
    else if (kind == "source-sink")
        r.kind = RuleKind::SourceSink;
    else
        throw ParseError(origin, kind_line, "unknown rule kind '" + kind + "'");

    const auto& [cat, cat_line] = require("category");
    auto category = parse_category(cat);
    if (!category)
        throw ParseError(origin, cat_line, "unknown OWASP category '" + cat + "'");
    r.category = *category;

    const auto& [cwes, cwes_line] = require("cwes");
    for (auto part : text::split(cwes, ',')) {
        auto id = text::trim(part);
        if (!is_well_formed_cwe(id))
            throw ParseError(origin, cwes_line, "malformed CWE id '" + std::string(id) + "'");
        r.cwe_ids.emplace_back(id);
    }

    r.trigger = require("trigger").first;
    if (auto it = rec.single.find("sink"); it != rec.single.end())
        r.sink_template = it->second.first;
    if (auto it = rec.single.find("desc"); it != rec.single.end())
        r.description = it->second.first;

    r.sanitizer_excludes = rec.excludes;
    if (rec.excludes.empty() && r.kind == RuleKind::SourceSink && r.category == OwaspCategory::Injection)
        r.sanitizer_excludes = default_injection_excludes();
    return r;
}

} // namespace detail

/// Parses catalog text and validates every rule. Taxonomy coverage is not
/// enforced here; see load_ruleset.
inline RuleSet parse_rules(std::string_view content, const std::string& origin = "<memory>") {
    if (auto bad = text::first_invalid_utf8(content))
        throw DecodeError(origin, *bad);
    if (content.starts_with("\xEF\xBB\xBF"))
        content.remove_prefix(3);

    static const std::set<std::string, std::less<>> kKnownKeys = {"id",   "kind",    "category", "cwes",
                                                                  "trigger", "sink", "exclude",  "desc", "version"};
    std::vector<DetectionRule> rules;
    std::string version;
    detail::PendingRecord rec;

    auto flush = [&] {
        if (rec.empty())
            return;
        if (rec.single.size() == 1 && rec.single.contains("version") && rec.excludes.empty()) {
            version = rec.single.at("version").first;
        } else {
            if (rec.single.contains("version"))
                throw ParseError(origin, rec.single.at("version").second, "version must be a record of its own");
            rules.push_back(detail::build_rule(rec, origin));
        }
        rec = {};
    };

    const auto lines = text::split_lines(content);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const std::size_t lineno = n + 1;
        std::string_view line = lines[n];
        if (text::trim(line).empty()) {
            flush();
            continue;
        }
        if (line.front() == '#')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(origin, lineno, "expected key=value");
        std::string_view key = line.substr(0, eq);
        std::string value(line.substr(eq + 1));
        if (!kKnownKeys.contains(key))
            throw ParseError(origin, lineno, "unknown key '" + std::string(key) + "'");
        if (rec.empty())
            rec.first_line = lineno;
        if (key == "exclude") {
            rec.excludes.push_back(std::move(value));
        } else if (!rec.single.emplace(std::string(key), std::make_pair(std::move(value), lineno)).second) {
            throw ParseError(origin, lineno, "duplicate key '" + std::string(key) + "'");
        }
    }
    flush();

    try {
        return RuleSet(std::move(rules), std::move(version));
    } catch (const ValidationError& e) {
        throw ValidationError(origin + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Taxonomy coverage

struct TaxonomyFacts {
    std::size_t total_rules = 0;
    std::array<std::size_t, kCategoryCount> rules_per_category{};
    /// Rule count per taxonomy CWE, in taxonomy order (zero when uncovered).
    std::vector<std::pair<std::string, std::size_t>> rules_per_cwe;
    std::vector<std::string> missing_cwes;

    std::size_t covered_cwes() const { return rules_per_cwe.size() - missing_cwes.size(); }
    std::size_t covered_categories() const {
        std::size_t n = 0;
        for (auto c : rules_per_category)
            n += c > 0;
        return n;
    }
    /// CWEs of `category` with at least one rule.
    std::vector<std::string> covered_cwes_of(OwaspCategory category) const {
        std::vector<std::string> out;
        for (const auto& [id, count] : rules_per_cwe)
            if (count > 0 && category_of_cwe(id) == category)
                out.push_back(id);
        return out;
    }
    bool complete() const { return missing_cwes.empty() && covered_categories() == kCategoryCount; }
};

inline TaxonomyFacts validate_taxonomy(const RuleSet& rs) {
    TaxonomyFacts facts;
    facts.total_rules = rs.size();
    std::map<std::string, std::size_t, std::less<>> per_cwe;
    for (const auto& r : rs.rules()) {
        ++facts.rules_per_category[index_of(r.category)];
        for (const auto& cwe : std::set<std::string>(r.cwe_ids.begin(), r.cwe_ids.end()))
            ++per_cwe[cwe];
    }
    for (const auto& e : kCweTaxonomy) {
        auto it = per_cwe.find(e.id);
        const std::size_t count = it == per_cwe.end() ? 0 : it->second;
        facts.rules_per_cwe.emplace_back(std::string(e.id), count);
        if (count == 0)
            facts.missing_cwes.emplace_back(e.id);
    }
    return facts;
}

/// Throws ValidationError listing the uncovered CWEs.
inline void enforce_coverage(const RuleSet& rs, const std::string& origin) {
    const auto facts = validate_taxonomy(rs);
    if (facts.complete())
        return;
    std::string msg = origin + ": catalog does not cover";
    for (std::size_t i = 0; i < facts.missing_cwes.size(); ++i)
        msg += (i ? ", " : " ") + facts.missing_cwes[i];
    throw ValidationError(msg);
}

/// Reads, validates and coverage-checks a catalog file.
inline RuleSet load_ruleset(const std::filesystem::path& path) {
    RuleSet rs = parse_rules(text::read_file(path), path.string());
    enforce_coverage(rs, path.string());
    return rs;
}

} // namespace snipscan
