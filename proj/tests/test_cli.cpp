#include "cli_app.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace snipscan;
using snipscan::testing::TempDir;
using snipscan::testing::data_path;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

} // namespace

TEST(Cli, NoSubcommandIsAUsageError) { EXPECT_EQ(run({}).code, cli::kExitError); }

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, cli::kExitOk); }

TEST(Cli, MissingInputIsAnError) {
    EXPECT_EQ(run({"scan", "/nonexistent/corpus.txt"}).code, cli::kExitError);
}

TEST(Cli, ScanWritesBothReports) {
    TempDir dir;
    text::write_file(dir / "c.txt", "x = eval(y)\nprint(1)\n");
    const auto r = run({"scan", (dir / "c.txt").string(), "--out", (dir / "o").string(), "--test-mode"});
    EXPECT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_EQ(r.out, text::read_file(dir / "o" / "summary.txt"));
    EXPECT_NE(r.out.find("unsafe: 1 (50.00%)"), std::string::npos);
    EXPECT_NE(r.out.find("total_time_s: 0.000000"), std::string::npos);
    EXPECT_EQ(text::read_file(dir / "o" / "detail.txt"), "1\tunsafe\tInjection\n2\tsafe\t\n");
}

TEST(Cli, FailOnFindings) {
    TempDir dir;
    text::write_file(dir / "bad.txt", "x = eval(y)\n");
    text::write_file(dir / "good.txt", "print(1)\n");
    const std::string out = (dir / "o").string();
    EXPECT_EQ(run({"scan", (dir / "bad.txt").string(), "--out", out, "--fail-on-findings"}).code,
              cli::kExitFindings);
    EXPECT_EQ(run({"scan", (dir / "good.txt").string(), "--out", out, "--fail-on-findings"}).code, cli::kExitOk);
    EXPECT_EQ(run({"scan", (dir / "bad.txt").string(), "--out", out}).code, cli::kExitOk);
}

TEST(Cli, BadCorpusReportsAndFails) {
    TempDir dir;
    text::write_file(dir / "c.txt", "ok\n\xFF\n");
    const auto r = run({"scan", (dir / "c.txt").string(), "--out", (dir / "o").string()});
    EXPECT_EQ(r.code, cli::kExitError);
    EXPECT_TRUE(r.err.starts_with("snipscan: ")) << r.err;
    EXPECT_NE(r.err.find("invalid UTF-8"), std::string::npos);
}

TEST(Cli, ValidateRules) {
    const auto r = run({"validate-rules"});
    EXPECT_EQ(r.code, cli::kExitOk);
    EXPECT_TRUE(r.out.starts_with("rules=" + std::to_string(default_ruleset().size()) + " cwes=35 categories=9\n"));
    EXPECT_NE(r.out.find("CWE-502\tSoftware and Data Integrity Failures\t"), std::string::npos);
}

TEST(Cli, ValidateRulesReportsGaps) {
    TempDir dir;
    text::write_file(dir / "small.rules", "id=x\nkind=simple\ncategory=Injection\ncwes=CWE-095\ntrigger=eval\\(\n");
    const auto r = run({"validate-rules", "--rules", (dir / "small.rules").string()});
    EXPECT_EQ(r.code, cli::kExitError);
    EXPECT_TRUE(r.out.starts_with("rules=1 cwes=1 categories=1\n"));
    EXPECT_NE(r.err.find("missing rule for CWE-020"), std::string::npos);
}

TEST(Cli, ScanRejectsIncompleteCatalog) {
    TempDir dir;
    text::write_file(dir / "small.rules", "id=x\nkind=simple\ncategory=Injection\ncwes=CWE-095\ntrigger=eval\\(\n");
    text::write_file(dir / "c.txt", "eval(x)\n");
    const auto r = run({"scan", (dir / "c.txt").string(), "--rules", (dir / "small.rules").string()});
    EXPECT_EQ(r.code, cli::kExitError);
    EXPECT_NE(r.err.find("does not cover"), std::string::npos);
}

TEST(Cli, NormalizePrintsOneLine) {
    const auto r = run({"normalize", data_path("yaml_loader.py").string()});
    EXPECT_EQ(r.code, cli::kExitOk);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);
    EXPECT_TRUE(r.out.ends_with("\\nprint(prod_and_qt)\n"));
}

TEST(Cli, MineWritesCandidatesAndDrafts) {
    TempDir dir;
    const auto r = run({"mine", data_path("request_pair.txt").string(), "--labels", data_path("request_pair.labels").string(),
                        "--out", dir.path().string(), "--drafts"});
    EXPECT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_EQ(r.out, "candidates=1\ndrafts=1\n");
    EXPECT_EQ(text::read_file(dir / "candidates.tsv"),
              "Injection\t0.6220\t1,2\tvar0 = request.args.get(var1, var2) var3 = ao(var0)\n");
    EXPECT_TRUE(text::read_file(dir / "drafts.rules").starts_with("# review required\nid=draft-injection-1-2\n"));
}

TEST(Cli, MineThresholdOutOfRange) {
    EXPECT_EQ(run({"mine", data_path("request_pair.txt").string(), "--labels", data_path("request_pair.labels").string(),
                   "--threshold", "1.5"})
                  .code,
              cli::kExitError);
}

TEST(Cli, EvalComparesDetailFiles) {
    TempDir dir;
    text::write_file(dir / "a.txt", "1\tunsafe\tInjection\n2\tsafe\t\n");
    text::write_file(dir / "truth.txt", "1\t1\n2\t0\n");
    const auto r = run({"eval", (dir / "a.txt").string(), "--truth", (dir / "truth.txt").string(), "--out",
                        dir.path().string()});
    EXPECT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_NE(r.out.find("a.txt"), std::string::npos);
    EXPECT_EQ(r.out, text::read_file(dir / "eval.txt"));
}

TEST(Cli, EvalIdMismatchFails) {
    TempDir dir;
    text::write_file(dir / "a.txt", "1\tunsafe\tInjection\n");
    text::write_file(dir / "truth.txt", "1\t1\n2\t0\n");
    const auto r = run({"eval", (dir / "a.txt").string(), "--truth", (dir / "truth.txt").string(), "--out",
                        dir.path().string()});
    EXPECT_EQ(r.code, cli::kExitError);
    EXPECT_NE(r.err.find("truth only: 2"), std::string::npos);
}

TEST(Cli, EvalNeedsSomethingToScore) {
    TempDir dir;
    text::write_file(dir / "truth.txt", "1\t1\n");
    EXPECT_EQ(run({"eval", "--truth", (dir / "truth.txt").string(), "--out", dir.path().string()}).code,
              cli::kExitError);
}
