#pragma once

// Summary report and per-snippet detail file.
//
// Summary layout (LF line endings):
//   analyzed: 3
//   safe: 1 (33.33%)
//   unsafe: 2 (66.67%)
//   categories:
//     Injection: 1
//     Software and Data Integrity Failures: 2
//   total_time_s: 0.000123
//   avg_time_per_snippet_s: 0.000041
//
// Detail layout, one line per snippet in corpus order:
//   <snippet_id>\t<safe|unsafe>\t<categories, comma-separated, canonical order>

#include <snipscan/engine.hpp>
#include <snipscan/error.hpp>
#include <snipscan/taxonomy.hpp>
#include <snipscan/text.hpp>

#include <array>
#include <charconv>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace snipscan {

struct ScanReport {
    std::size_t analyzed = 0;
    std::size_t safe_count = 0;
    std::size_t unsafe_count = 0;
    double safe_pct = 0.0;
    double unsafe_pct = 0.0;
    std::array<std::size_t, kCategoryCount> category_counts{}; ///< snippets per category
    double total_time_s = 0.0;
    double avg_time_per_snippet_s = 0.0;

    std::size_t category_total() const {
        std::size_t n = 0;
        for (auto c : category_counts)
            n += c;
        return n;
    }
};

/// One parsed line of a detail file.
struct DetailRecord {
    std::size_t snippet_id = 0;
    bool unsafe = false;
    std::vector<OwaspCategory> categories;

    friend bool operator==(const DetailRecord&, const DetailRecord&) = default;
};

inline DetailRecord to_detail(const SnippetVerdict& v) { return {v.snippet_id, v.unsafe(), v.categories}; }

inline std::vector<DetailRecord> to_detail(const std::vector<SnippetVerdict>& verdicts) {
    std::vector<DetailRecord> out;
    out.reserve(verdicts.size());
    for (const auto& v : verdicts)
        out.push_back(to_detail(v));
    return out;
}

inline ScanReport build_report(const std::vector<DetailRecord>& records, double total_time_s = 0.0) {
    ScanReport r;
    r.analyzed = records.size();
    for (const auto& rec : records) {
        if (rec.unsafe)
            ++r.unsafe_count;
        else
            ++r.safe_count;
        for (auto c : canonical_order(rec.categories))
            ++r.category_counts[index_of(c)];
    }
    if (r.analyzed > 0) {
        r.safe_pct = 100.0 * static_cast<double>(r.safe_count) / static_cast<double>(r.analyzed);
        r.unsafe_pct = 100.0 * static_cast<double>(r.unsafe_count) / static_cast<double>(r.analyzed);
        r.total_time_s = total_time_s;
        r.avg_time_per_snippet_s = total_time_s / static_cast<double>(r.analyzed);
    }
    return r;
}

/// Report over verdicts; total time is the sum of per-snippet times.
inline ScanReport build_report(const std::vector<SnippetVerdict>& verdicts) {
    double total = 0.0;
    for (const auto& v : verdicts)
        total += v.elapsed_s;
    return build_report(to_detail(verdicts), total);
}

namespace detail {

inline std::string fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

} // namespace detail

/// With `test_mode` set, both timing fields are written as zero so that
/// identical verdicts produce byte-identical files.
inline std::string format_summary(const ScanReport& r, bool test_mode = false) {
    std::string out;
    out += "analyzed: " + std::to_string(r.analyzed) + "\n";
    out += "safe: " + std::to_string(r.safe_count) + " (" + detail::fixed(r.safe_pct, 2) + "%)\n";
    out += "unsafe: " + std::to_string(r.unsafe_count) + " (" + detail::fixed(r.unsafe_pct, 2) + "%)\n";
    out += "categories:\n";
    for (auto c : kAllCategories)
        if (const auto n = r.category_counts[index_of(c)]; n > 0)
            out += "  " + std::string(to_string(c)) + ": " + std::to_string(n) + "\n";
    out += "total_time_s: " + detail::fixed(test_mode ? 0.0 : r.total_time_s, 6) + "\n";
    out += "avg_time_per_snippet_s: " + detail::fixed(test_mode ? 0.0 : r.avg_time_per_snippet_s, 6) + "\n";
    return out;
}

inline std::string format_detail_line(const DetailRecord& rec) {
    return std::to_string(rec.snippet_id) + "\t" + (rec.unsafe ? "unsafe" : "safe") + "\t" +
           join_categories(canonical_order(rec.categories)) + "\n";
}

inline std::string format_detail(const std::vector<DetailRecord>& records) {
    std::string out;
    for (const auto& rec : records)
        out += format_detail_line(rec);
    return out;
}

inline std::string format_detail(const std::vector<SnippetVerdict>& verdicts) {
    return format_detail(to_detail(verdicts));
}

inline void write_summary(const ScanReport& r, const std::filesystem::path& path, bool test_mode = false) {
    text::write_file(path, format_summary(r, test_mode));
}

inline void write_detail(const std::vector<SnippetVerdict>& verdicts, const std::filesystem::path& path) {
    text::write_file(path, format_detail(verdicts));
}

inline std::vector<DetailRecord> parse_detail(std::string_view content, const std::string& origin = "<memory>") {
    std::vector<DetailRecord> out;
    const auto lines = text::split_lines(content);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const std::size_t lineno = n + 1;
        if (lines[n].empty())
            continue;
        const auto fields = text::split(lines[n], '\t');
        if (fields.size() != 3)
            throw ParseError(origin, lineno, "expected <id>\\t<safe|unsafe>\\t<categories>");
        DetailRecord rec;
        auto id = fields[0];
        auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), rec.snippet_id);
        if (ec != std::errc{} || ptr != id.data() + id.size() || id.empty())
            throw ParseError(origin, lineno, "bad snippet id '" + std::string(id) + "'");
        if (fields[1] == "unsafe")
            rec.unsafe = true;
        else if (fields[1] != "safe")
            throw ParseError(origin, lineno, "verdict must be safe or unsafe, got '" + std::string(fields[1]) + "'");
        if (!fields[2].empty()) {
            for (auto name : text::split(fields[2], ',')) {
                auto cat = parse_category(name);
                if (!cat)
                    throw ParseError(origin, lineno, "unknown category '" + std::string(name) + "'");
                rec.categories.push_back(*cat);
            }
        }
        if (!rec.unsafe && !rec.categories.empty())
            throw ParseError(origin, lineno, "safe snippet cannot carry categories");
        out.push_back(std::move(rec));
    }
    return out;
}

inline std::vector<DetailRecord> read_detail(const std::filesystem::path& path) {
    return parse_detail(text::read_utf8_file(path), path.string());
}

} // namespace snipscan
