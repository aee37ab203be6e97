#pragma once

// Snippet-level binary evaluation of detector verdicts against manual labels.

#include <snipscan/engine.hpp>
#include <snipscan/error.hpp>
#include <snipscan/report.hpp>
#include <snipscan/text.hpp>

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace snipscan {

struct Label {
    bool vulnerable = false;
    std::vector<std::string> cwe_ids;

    friend bool operator==(const Label&, const Label&) = default;
};

struct GroundTruth {
    std::map<std::size_t, Label> labels;

    std::size_t size() const noexcept { return labels.size(); }
};

struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    /// Precision or recall had a zero denominator and was reported as 0.
    bool degenerate = false;
};

/// Truth file: `<id>\t<0|1>[\t<cwe,cwe,...>]` per line.
inline GroundTruth parse_truth(std::string_view content, const std::string& origin = "<memory>") {
    GroundTruth truth;
    const auto lines = text::split_lines(content);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const std::size_t lineno = n + 1;
        if (lines[n].empty())
            continue;
        const auto fields = text::split(lines[n], '\t');
        if (fields.size() < 2 || fields.size() > 3)
            throw ParseError(origin, lineno, "expected <id>\\t<0|1>[\\t<cwes>]");
        std::size_t id = 0;
        auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), id);
        if (ec != std::errc{} || ptr != fields[0].data() + fields[0].size() || fields[0].empty())
            throw ParseError(origin, lineno, "bad snippet id '" + std::string(fields[0]) + "'");
        Label label;
        if (fields[1] == "1")
            label.vulnerable = true;
        else if (fields[1] != "0")
            throw ParseError(origin, lineno, "label must be 0 or 1");
        if (fields.size() == 3 && !fields[2].empty()) {
            for (auto cwe : text::split(fields[2], ',')) {
                if (!is_well_formed_cwe(cwe))
                    throw ParseError(origin, lineno, "malformed CWE id '" + std::string(cwe) + "'");
                label.cwe_ids.emplace_back(cwe);
            }
        }
        if (!truth.labels.emplace(id, std::move(label)).second)
            throw ParseError(origin, lineno, "duplicate snippet id " + std::to_string(id));
    }
    return truth;
}

inline GroundTruth read_truth(const std::filesystem::path& path) {
    return parse_truth(text::read_utf8_file(path), path.string());
}

/// Snippet id -> flagged unsafe.
using Predictions = std::map<std::size_t, bool>;

inline Predictions predictions_of(const std::vector<DetailRecord>& records) {
    Predictions p;
    for (const auto& r : records)
        p[r.snippet_id] = r.unsafe;
    return p;
}

inline Predictions predictions_of(const std::vector<SnippetVerdict>& verdicts) {
    Predictions p;
    for (const auto& v : verdicts)
        p[v.snippet_id] = v.unsafe();
    return p;
}

inline ConfusionMatrix confusion(const Predictions& predicted, const GroundTruth& truth) {
    std::vector<std::size_t> only_predicted, only_labeled;
    for (const auto& [id, _] : predicted)
        if (!truth.labels.contains(id))
            only_predicted.push_back(id);
    for (const auto& [id, _] : truth.labels)
        if (!predicted.contains(id))
            only_labeled.push_back(id);
    if (!only_predicted.empty() || !only_labeled.empty()) {
        auto list = [](const std::vector<std::size_t>& ids) {
            std::string s;
            for (std::size_t i = 0; i < ids.size(); ++i)
                s += (i ? "," : "") + std::to_string(ids[i]);
            return s.empty() ? std::string("none") : s;
        };
        throw ValidationError("snippet ids differ between verdicts and ground truth; verdicts only: " +
                              list(only_predicted) + "; truth only: " + list(only_labeled));
    }

    ConfusionMatrix cm;
    for (const auto& [id, unsafe] : predicted) {
        const bool vulnerable = truth.labels.at(id).vulnerable;
        if (unsafe && vulnerable)
            ++cm.tp;
        else if (unsafe)
            ++cm.fp;
        else if (vulnerable)
            ++cm.fn;
        else
            ++cm.tn;
    }
    return cm;
}

template <typename Verdicts>
ConfusionMatrix confusion(const Verdicts& verdicts, const GroundTruth& truth) {
    return confusion(predictions_of(verdicts), truth);
}

inline Metrics metrics(const ConfusionMatrix& cm) {
    const std::size_t total = cm.total();
    if (total == 0)
        throw ValidationError("cannot compute metrics over an empty confusion matrix");
    Metrics m;
    const auto ratio = [&m](std::size_t num, std::size_t den) {
        if (den == 0) {
            m.degenerate = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.precision = ratio(cm.tp, cm.tp + cm.fp);
    m.recall = ratio(cm.tp, cm.tp + cm.fn);
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(total);
    return m;
}

/// Distinct CWEs labeled on vulnerable snippets, and how many of them were
/// attributed by a finding on a snippet carrying that label. Supplementary;
/// never folded into the headline metrics.
struct CweAttribution {
    std::size_t labeled = 0;
    std::size_t attributed = 0;
};

inline CweAttribution cwe_attribution(const std::vector<SnippetVerdict>& verdicts, const GroundTruth& truth) {
    std::set<std::string> labeled, attributed;
    for (const auto& v : verdicts) {
        auto it = truth.labels.find(v.snippet_id);
        if (it == truth.labels.end() || !it->second.vulnerable)
            continue;
        for (const auto& cwe : it->second.cwe_ids) {
            labeled.insert(cwe);
            for (const auto& f : v.findings)
                if (std::find(f.cwe_ids.begin(), f.cwe_ids.end(), cwe) != f.cwe_ids.end())
                    attributed.insert(cwe);
        }
    }
    return {labeled.size(), attributed.size()};
}

struct ComparisonRow {
    std::string detector;
    ConfusionMatrix cm;
    Metrics metrics;
};

inline ComparisonRow evaluate(std::string detector, const Predictions& predicted, const GroundTruth& truth) {
    ComparisonRow row{std::move(detector), confusion(predicted, truth), {}};
    row.metrics = metrics(row.cm);
    return row;
}

/// One row per detail file; the detector is named by the file name.
inline std::vector<ComparisonRow> compare(const std::vector<std::filesystem::path>& detail_files,
                                          const GroundTruth& truth) {
    std::vector<ComparisonRow> rows;
    for (const auto& path : detail_files)
        rows.push_back(evaluate(path.filename().string(), predictions_of(read_detail(path)), truth));
    return rows;
}

/// Aligned plain-text table with 2-decimal metrics.
inline std::string format_comparison(const std::vector<ComparisonRow>& rows) {
    const std::vector<std::string> header = {"detector", "TP", "FP", "TN", "FN", "precision", "recall", "F1",
                                             "accuracy", "note"};
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows) {
        cells.push_back({r.detector, std::to_string(r.cm.tp), std::to_string(r.cm.fp), std::to_string(r.cm.tn),
                         std::to_string(r.cm.fn), detail::fixed(r.metrics.precision, 2),
                         detail::fixed(r.metrics.recall, 2), detail::fixed(r.metrics.f1, 2),
                         detail::fixed(r.metrics.accuracy, 2), r.metrics.degenerate ? "degenerate" : ""});
    }
    if (cells.empty())
        return "";

    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& row : cells)
            width[c] = std::max(width[c], row[c].size());
    }
    auto render = [&](const std::vector<std::string>& row) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            const std::size_t pad = width[c] - row[c].size();
            if (c == 0) {
                line += row[c] + std::string(pad, ' ');
            } else if (c == row.size() - 1) {
                line += "  " + row[c];
            } else {
                line += "  " + std::string(pad, ' ') + row[c];
            }
        }
        while (!line.empty() && line.back() == ' ')
            line.pop_back();
        return line + "\n";
    };
    std::string out = render(header);
    for (const auto& row : cells)
        out += render(row);
    return out;
}

} // namespace snipscan
