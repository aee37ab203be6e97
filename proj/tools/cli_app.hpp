#pragma once

// Command-line front end. Kept in a header so the tests can drive it with
// captured streams.
//
// Exit codes: 0 success, 1 usage or input error, 2 findings present under
// --fail-on-findings.

#include <snipscan/snipscan.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace snipscan::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFindings = 2;

struct Options {
    std::string input;
    std::vector<std::string> inputs;
    std::optional<std::string> rules;
    std::string out_dir = ".";
    double threshold = 0.5;
    bool test_mode = false;
    bool fail_on_findings = false;
    std::size_t jobs = 1;
    std::string labels;
    std::string truth;
    std::optional<std::string> corpus;
    bool drafts = false;
};

inline RuleSet active_rules(const Options& o) {
    return o.rules ? load_ruleset(*o.rules) : default_ruleset();
}

inline int run_scan(const Options& o, std::ostream& out) {
    const RuleSet rules = active_rules(o);
    const Corpus corpus = load_snippets(o.input);
    const ScanResult result = scan_corpus(corpus, rules, o.jobs);
    const ScanReport report = build_report(result.verdicts);

    fs::create_directories(o.out_dir);
    write_summary(report, fs::path(o.out_dir) / "summary.txt", o.test_mode);
    write_detail(result.verdicts, fs::path(o.out_dir) / "detail.txt");
    out << format_summary(report, o.test_mode);

    if (o.fail_on_findings && report.unsafe_count > 0)
        return kExitFindings;
    return kExitOk;
}

inline int run_mine(const Options& o, std::ostream& out, std::ostream& err) {
    const auto corpus = load_labeled_corpus(o.input, o.labels);
    const auto candidates = mine_patterns(corpus, o.threshold);
    fs::create_directories(o.out_dir);
    text::write_file(fs::path(o.out_dir) / "candidates.tsv", format_candidates(candidates));
    out << "candidates=" << candidates.size() << "\n";

    if (o.drafts) {
        std::vector<DetectionRule> drafts;
        for (const auto& c : candidates) {
            auto result = suggest_rule(c);
            if (auto* rule = std::get_if<DetectionRule>(&result)) {
                drafts.push_back(std::move(*rule));
            } else {
                err << "pair " << c.source_pair.first << "," << c.source_pair.second
                    << ": no draft, " << std::get<Rejection>(result).reason << "\n";
            }
        }
        text::write_file(fs::path(o.out_dir) / "drafts.rules", format_drafts(drafts));
        out << "drafts=" << drafts.size() << "\n";
    }
    return kExitOk;
}

inline int run_eval(const Options& o, std::ostream& out) {
    const GroundTruth truth = read_truth(o.truth);
    std::vector<fs::path> files(o.inputs.begin(), o.inputs.end());
    auto rows = compare(files, truth);

    std::string extra;
    if (o.corpus) {
        const RuleSet rules = active_rules(o);
        const ScanResult result = scan_corpus(load_snippets(*o.corpus), rules, o.jobs);
        rows.push_back(evaluate("snipscan", predictions_of(result.verdicts), truth));
        const auto cwe = cwe_attribution(result.verdicts, truth);
        extra = "cwe attribution (snipscan): " + std::to_string(cwe.attributed) + " of " +
                std::to_string(cwe.labeled) + " labeled CWEs\n";
    }
    if (rows.empty())
        throw ValidationError("eval needs at least one detail file or --corpus");

    const std::string table = format_comparison(rows) + extra;
    fs::create_directories(o.out_dir);
    text::write_file(fs::path(o.out_dir) / "eval.txt", table);
    out << table;
    return kExitOk;
}

inline int run_normalize(const Options& o, std::ostream& out) {
    // The file's own final line break terminates the last line; it is not code.
    std::string source = text::read_utf8_file(o.input);
    if (source.ends_with("\r\n"))
        source.resize(source.size() - 2);
    else if (source.ends_with('\n') || source.ends_with('\r'))
        source.pop_back();
    out << normalize_to_single_line(source) << "\n";
    return kExitOk;
}

inline int run_validate(const Options& o, std::ostream& out, std::ostream& err) {
    const RuleSet rules = o.rules ? parse_rules(text::read_utf8_file(*o.rules), *o.rules)
                                  : parse_rules(kDefaultCatalogText, "<embedded catalog>");
    const TaxonomyFacts facts = validate_taxonomy(rules);
    out << "rules=" << facts.total_rules << " cwes=" << facts.covered_cwes()
        << " categories=" << facts.covered_categories() << "\n";
    for (std::size_t i = 0; i < kCweTaxonomy.size(); ++i)
        out << kCweTaxonomy[i].id << "\t" << to_string(kCweTaxonomy[i].category) << "\t"
            << facts.rules_per_cwe[i].second << "\n";
    if (!facts.complete()) {
        for (const auto& cwe : facts.missing_cwes)
            err << "missing rule for " << cwe << "\n";
        return kExitError;
    }
    return kExitOk;
}

/// Runs one command line; `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"snipscan: regex-rule security scanner for Python code snippets"};
    app.require_subcommand(1);
    Options o;

    auto add_rules = [&o](CLI::App* sub) {
        sub->add_option("--rules", o.rules, "rule catalog (default: built-in)")->check(CLI::ExistingFile);
    };
    auto add_jobs = [&o](CLI::App* sub) {
        sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::Range(std::size_t{1}, std::size_t{256}));
    };

    auto* scan = app.add_subcommand("scan", "scan a snippet corpus");
    scan->add_option("corpus", o.input, "corpus file, one snippet per line")->required()->check(CLI::ExistingFile);
    add_rules(scan);
    scan->add_option("--out", o.out_dir, "output directory");
    scan->add_flag("--test-mode", o.test_mode, "zero the timing fields");
    scan->add_flag("--fail-on-findings", o.fail_on_findings, "exit 2 when anything is unsafe");
    add_jobs(scan);

    auto* mine = app.add_subcommand("mine", "mine candidate patterns from a labeled corpus");
    mine->add_option("corpus", o.input, "corpus file")->required()->check(CLI::ExistingFile);
    mine->add_option("--labels", o.labels, "labels file")->required()->check(CLI::ExistingFile);
    mine->add_option("--threshold", o.threshold, "similarity gate, strict")->check(CLI::Range(0.0, 1.0));
    mine->add_option("--out", o.out_dir, "output directory");
    mine->add_flag("--drafts", o.drafts, "also write draft rules for review");

    auto* eval = app.add_subcommand("eval", "compare detector verdicts with ground truth");
    eval->add_option("details", o.inputs, "detail files, one per detector")->check(CLI::ExistingFile);
    eval->add_option("--truth", o.truth, "ground-truth labels")->required()->check(CLI::ExistingFile);
    eval->add_option("--corpus", o.corpus, "also scan this corpus and add a row")->check(CLI::ExistingFile);
    add_rules(eval);
    eval->add_option("--out", o.out_dir, "output directory");
    add_jobs(eval);

    auto* normalize = app.add_subcommand("normalize", "print a source file as one corpus line");
    normalize->add_option("source", o.input, "source file")->required()->check(CLI::ExistingFile);

    auto* validate = app.add_subcommand("validate-rules", "check a catalog against the taxonomy");
    add_rules(validate);

    std::vector<const char*> argv{"snipscan"};
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (scan->parsed())
            return run_scan(o, out);
        if (mine->parsed())
            return run_mine(o, out, err);
        if (eval->parsed())
            return run_eval(o, out);
        if (normalize->parsed())
            return run_normalize(o, out);
        return run_validate(o, out, err);
    } catch (const std::exception& e) {
        err << "snipscan: " << e.what() << "\n";
        return kExitError;
    }
}

} // namespace snipscan::cli
