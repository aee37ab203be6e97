#include <snipscan/miner.hpp>
#include <snipscan/simlcs.hpp>

#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace snipscan;

namespace {

LabeledSnippet labeled(std::size_t id, std::string text, OwaspCategory cat = OwaspCategory::Injection,
                       std::vector<std::string> cwes = {"CWE-079"}) {
    return {Snippet(id, std::move(text)), cat, std::move(cwes)};
}

std::vector<LabeledSnippet> request_pair() {
    const Corpus c = parse_corpus(snipscan::testing::read_data("request_pair.txt"));
    return label_corpus(c, parse_labels(snipscan::testing::read_data("request_pair.labels")));
}

CandidatePattern candidate(std::string pattern, std::pair<std::size_t, std::size_t> pair = {3, 8}) {
    CandidatePattern c;
    c.pattern_text = std::move(pattern);
    c.category = OwaspCategory::Injection;
    c.source_pair = pair;
    c.pair_similarity = 0.9;
    c.cwe_ids = {"CWE-095"};
    return c;
}

} // namespace

TEST(Labels, Parse) {
    const auto labels = parse_labels("1\tInjection\tCWE-020,CWE-079\n\n4\tSecurity Misconfiguration\tCWE-611\n");
    ASSERT_EQ(labels.size(), 2u);
    EXPECT_EQ(labels.at(1).cwe_ids, (std::vector<std::string>{"CWE-020", "CWE-079"}));
    EXPECT_EQ(labels.at(4).category, OwaspCategory::SecurityMisconfiguration);
}

TEST(Labels, Errors) {
    auto line_of = [](const std::string& s) -> std::size_t {
        try {
            parse_labels(s);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of("1\tInjection\n"), 1u);
    EXPECT_EQ(line_of("1\tInjection\tCWE-079\nz\tInjection\tCWE-079\n"), 2u);
    EXPECT_EQ(line_of("1\tInjektion\tCWE-079\n"), 1u);
    EXPECT_EQ(line_of("1\tInjection\t\n"), 1u);
    EXPECT_EQ(line_of("1\tInjection\tCWE-022\n"), 1u);
    EXPECT_EQ(line_of("1\tInjection\tCWE-999\n"), 1u);
    EXPECT_EQ(line_of("1\tInjection\tCWE-079\n1\tInjection\tCWE-079\n"), 2u);
}

TEST(Labels, MustMatchCorpus) {
    const Corpus c = parse_corpus("a = 1\nb = 2\n");
    EXPECT_THROW(label_corpus(c, parse_labels("1\tInjection\tCWE-079\n")), ValidationError);
    EXPECT_THROW(label_corpus(c, parse_labels("1\tInjection\tCWE-079\n2\tInjection\tCWE-079\n3\tInjection\tCWE-079\n")),
                 ValidationError);
}

TEST(Mine, RequestPairYieldsTheExpectedPattern) {
    const auto out = mine_patterns(request_pair(), 0.5);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].pattern_text, "var0 = request.args.get(var1, var2) var3 = ao(var0)");
    EXPECT_EQ(out[0].source_pair, (std::pair<std::size_t, std::size_t>{1, 2}));
    EXPECT_NEAR(out[0].pair_similarity, 0.6219512195121951, 1e-12);
    EXPECT_EQ(out[0].cwe_ids, (std::vector<std::string>{"CWE-020", "CWE-079"}));
    EXPECT_EQ(format_candidate(out[0]),
              "Injection\t0.6220\t1,2\tvar0 = request.args.get(var1, var2) var3 = ao(var0)\n");
}

TEST(Mine, GateIsStrict) {
    const auto pair = request_pair();
    EXPECT_EQ(mine_patterns(pair, 0.6219512195121951).size(), 0u);
    EXPECT_EQ(mine_patterns(pair, 0.62).size(), 1u);
}

TEST(Mine, IdenticalPairHasSimilarityOne) {
    const std::vector<LabeledSnippet> c = {labeled(1, "x = eval(y)"), labeled(2, "x = eval(y)")};
    const auto out = mine_patterns(c);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_DOUBLE_EQ(out[0].pair_similarity, 1.0);
    EXPECT_EQ(out[0].pattern_text, standardize(c[0].snippet).text);
}

TEST(Mine, CategoriesNeverMix) {
    const std::vector<LabeledSnippet> c = {
        labeled(1, "x = eval(y)"),
        labeled(2, "x = eval(y)", OwaspCategory::BrokenAccessControl, {"CWE-022"}),
    };
    EXPECT_TRUE(mine_patterns(c, 0.0).empty());
}

TEST(Mine, PairsBelowTheGateAreDropped) {
    const std::vector<LabeledSnippet> c = {labeled(1, "os.system(cmd)"), labeled(2, "return render(page)")};
    const double sim = similarity_ratio(decode_newline_markers(standardize(c[0].snippet).text),
                                        decode_newline_markers(standardize(c[1].snippet).text), {U'\n'})
                           .value;
    ASSERT_LE(sim, 0.5);
    EXPECT_TRUE(mine_patterns(c, 0.5).empty());
    EXPECT_EQ(mine_patterns(c, 0.0).size(), 1u);
}

TEST(Mine, ArgumentChecks) {
    EXPECT_THROW(mine_patterns({}, 0.5), ValidationError);
    EXPECT_THROW(mine_patterns(request_pair(), 1.5), ValidationError);
    EXPECT_THROW(mine_patterns(request_pair(), -0.1), ValidationError);
}

TEST(Mine, RandomCorporaKeepInvariants) {
    const std::vector<std::string> parts = {"x = ", "request.args.get(", "eval(", "name", ")", "\\n", "return ",
                                            "os.system(", "'a'", ", ", "y"};
    std::mt19937 rng(41);
    std::vector<LabeledSnippet> corpus;
    for (std::size_t id = 1; id <= 14; ++id) {
        std::string s;
        for (int k = 0; k < 7; ++k)
            s += parts[rng() % parts.size()];
        corpus.push_back(labeled(id, s));
    }
    std::reverse(corpus.begin(), corpus.end()); // ids out of order on purpose

    std::size_t previous = SIZE_MAX;
    for (double t : {0.0, 0.3, 0.5, 0.7, 0.9, 1.0}) {
        const auto out = mine_patterns(corpus, t);
        EXPECT_LE(out.size(), previous);
        previous = out.size();
        for (const auto& c : out) {
            EXPECT_GT(c.pair_similarity, t);
            EXPECT_LT(c.source_pair.first, c.source_pair.second);
            const auto& a = corpus[corpus.size() - c.source_pair.first].snippet;
            const auto& b = corpus[corpus.size() - c.source_pair.second].snippet;
            EXPECT_TRUE(is_subsequence(c.pattern_text, standardize(a).text));
            EXPECT_TRUE(is_subsequence(c.pattern_text, standardize(b).text));
        }
        for (std::size_t k = 1; k < out.size(); ++k)
            EXPECT_GE(out[k - 1].pair_similarity, out[k].pair_similarity);
    }
}

TEST(Draft, RequestPatternBecomesSourceSink) {
    const auto out = mine_patterns(request_pair());
    const auto draft = suggest_rule(out[0]);
    ASSERT_TRUE(std::holds_alternative<DetectionRule>(draft));
    const auto& r = std::get<DetectionRule>(draft);
    EXPECT_EQ(r.kind, RuleKind::SourceSink);
    EXPECT_EQ(r.trigger, R"(request\.args\.get\()");
    EXPECT_EQ(r.rule_id, "draft-injection-1-2");
    EXPECT_TRUE(r.review_required);
    EXPECT_NO_THROW(RuleSet({r}));
}

TEST(Draft, SimplePatternTrimsWildcards) {
    const auto eval_draft = suggest_rule(candidate("eval(var0)"));
    ASSERT_TRUE(std::holds_alternative<DetectionRule>(eval_draft));
    EXPECT_EQ(std::get<DetectionRule>(eval_draft).trigger, R"(eval\()");
    EXPECT_EQ(std::get<DetectionRule>(eval_draft).kind, RuleKind::Simple);

    const auto load = std::get<DetectionRule>(suggest_rule(candidate("var0 = yaml.load(var1)")));
    EXPECT_EQ(load.trigger, R"(=\s*yaml\.load\()");
}

TEST(Draft, ShortPatternsAreRejected) {
    const auto r = suggest_rule(candidate("abc"));
    ASSERT_TRUE(std::holds_alternative<Rejection>(r));
    EXPECT_EQ(std::get<Rejection>(r).reason, "pattern too short: 3 literal characters, need 4");
    // Enough literal characters overall, but no single run reaches the minimum.
    const auto scattered = suggest_rule(candidate("ab var0 cd"));
    ASSERT_TRUE(std::holds_alternative<Rejection>(scattered));
}

TEST(Draft, DraftsMatchTheirSources) {
    const auto pair = request_pair();
    const auto r = std::get<DetectionRule>(suggest_rule(mine_patterns(pair)[0]));
    const RuleSet rs({r});
    for (const auto& ls : pair)
        EXPECT_TRUE(evaluate_rule(r, rs.compiled(0), ls.snippet.text).has_value()) << ls.snippet.id;
}

TEST(Draft, FormatMarksReview) {
    const auto r = std::get<DetectionRule>(suggest_rule(candidate("eval(var0)")));
    const std::string text = format_drafts({r});
    EXPECT_TRUE(text.starts_with("# review required\nid=draft-injection-3-8\n"));
    EXPECT_EQ(parse_rules(text).rules()[0], r);
}
