#include <snipscan/default_catalog.hpp>
#include <snipscan/rules.hpp>

#include "support.hpp"

#include <gtest/gtest.h>

using namespace snipscan;

namespace {

const std::string kMinimal = R"(# comment
version=7

id=r1
kind=simple
category=Injection
cwes=CWE-095
trigger=\beval\(
desc=eval call

id=r2
kind=source-sink
category=Server-Side Request Forgery
cwes=CWE-918
trigger=request\.args\.get\(
sink=\burlopen\(\s*\b{VAR}\b
exclude=allowlist\(
)";

std::size_t parse_error_line(const std::string& text) {
    try {
        parse_rules(text, "t.rules");
    } catch (const ParseError& e) {
        EXPECT_TRUE(std::string(e.what()).starts_with("t.rules:" + std::to_string(e.line()) + ": "));
        return e.line();
    }
    ADD_FAILURE() << "expected ParseError for:\n" << text;
    return 0;
}

std::string validation_message(const std::string& text) {
    try {
        parse_rules(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    ADD_FAILURE() << "expected ValidationError for:\n" << text;
    return "";
}

std::string simple(const std::string& extra) {
    return "id=x\nkind=simple\ncategory=Injection\ncwes=CWE-095\ntrigger=eval\\(\n" + extra;
}

} // namespace

TEST(Catalog, ParsesRecords) {
    const RuleSet rs = parse_rules(kMinimal);
    EXPECT_EQ(rs.version(), "7");
    ASSERT_EQ(rs.size(), 2u);
    const auto& r1 = rs.rules()[0];
    EXPECT_EQ(r1.rule_id, "r1");
    EXPECT_EQ(r1.kind, RuleKind::Simple);
    EXPECT_EQ(r1.trigger, R"(\beval\()");
    EXPECT_EQ(r1.description, "eval call");
    const auto& r2 = rs.rules()[1];
    EXPECT_EQ(r2.kind, RuleKind::SourceSink);
    EXPECT_EQ(r2.category, OwaspCategory::ServerSideRequestForgery);
    EXPECT_EQ(r2.sanitizer_excludes, (std::vector<std::string>{"allowlist\\("}));
    EXPECT_EQ(rs.compiled(1).exclude_templates[0], R"((?:allowlist\()[^()]*\b{VAR}\b)");
}

TEST(Catalog, ValuesKeepEverythingAfterFirstEquals) {
    const RuleSet rs = parse_rules(simple("exclude=Loader\\s*=\\s*SafeLoader\n"));
    EXPECT_EQ(rs.rules()[0].sanitizer_excludes[0], "Loader\\s*=\\s*SafeLoader");
}

TEST(Catalog, InjectionSourceSinkGetsDefaultExcludes) {
    const RuleSet rs = parse_rules("id=x\nkind=source-sink\ncategory=Injection\ncwes=CWE-078\n"
                                   "trigger=input\\(\n");
    EXPECT_EQ(rs.rules()[0].sanitizer_excludes, default_injection_excludes());
    EXPECT_EQ(rs.compiled(0).sink_template, kDefaultSinkTemplate);
}

TEST(Catalog, ParseErrorsCarryLineNumbers) {
    EXPECT_EQ(parse_error_line("id=a\nnonsense line\n"), 2u);
    EXPECT_EQ(parse_error_line("\n\nid=a\ncolour=red\n"), 4u);
    EXPECT_EQ(parse_error_line(simple("trigger=again\n")), 6u);
    EXPECT_EQ(parse_error_line("id=a\nkind=weird\ncategory=Injection\ncwes=CWE-095\ntrigger=x\n"), 2u);
    EXPECT_EQ(parse_error_line("id=a\nkind=simple\ncategory=Injections\ncwes=CWE-095\ntrigger=x\n"), 3u);
    EXPECT_EQ(parse_error_line("id=a\nkind=simple\ncategory=Injection\ncwes=CWE-95\ntrigger=x\n"), 4u);
    // missing key: reported at the record's first line
    EXPECT_EQ(parse_error_line("# c\n\nid=a\nkind=simple\ncategory=Injection\ncwes=CWE-095\n"), 3u);
    EXPECT_EQ(parse_error_line(simple("version=2\n")), 6u);
}

TEST(Catalog, RejectsInvalidUtf8) { EXPECT_THROW(parse_rules("id=\xFF\n"), DecodeError); }

TEST(Validation, RuleInvariants) {
    EXPECT_NE(validation_message(simple("") + "\n" + simple("")).find("duplicate rule id x"), std::string::npos);
    EXPECT_NE(validation_message("id=x\nkind=simple\ncategory=Injection\ncwes=CWE-022\ntrigger=a\n")
                  .find("belongs to Broken Access Control"),
              std::string::npos);
    EXPECT_NE(validation_message("id=x\nkind=simple\ncategory=Injection\ncwes=CWE-999\ntrigger=a\n")
                  .find("not part of the taxonomy"),
              std::string::npos);
    EXPECT_NE(validation_message("id=x\nkind=simple\ncategory=Injection\ncwes=CWE-095\ntrigger=\n")
                  .find("empty trigger"),
              std::string::npos);
    EXPECT_NE(validation_message(simple("sink=f({VAR})\n")).find("simple rules take no sink"), std::string::npos);
    EXPECT_NE(validation_message(simple("exclude=int\\({VAR}\n")).find("cannot use {VAR}"), std::string::npos);
}

TEST(Validation, SourceSinkShape) {
    const std::string head = "id=x\nkind=source-sink\ncategory=Injection\ncwes=CWE-078\n";
    EXPECT_NE(validation_message(head + "trigger=input\n").find("opening parenthesis"), std::string::npos);
    EXPECT_NE(validation_message(head + "trigger=input\\(\nsink=f\\(\\)\n").find("exactly once"),
              std::string::npos);
    EXPECT_NE(validation_message(head + "trigger=input\\(\nsink={VAR}{VAR}\n").find("exactly once"),
              std::string::npos);
}

TEST(Validation, RegexMustCompile) {
    EXPECT_NE(validation_message(simple("exclude=(unclosed\n")).find("does not compile"), std::string::npos);
}

TEST(Validation, PortableSubsetOnly) {
    EXPECT_NE(validation_message(simple("exclude=(a)\\1\n")).find("backreference"), std::string::npos);
    EXPECT_NE(validation_message(simple("exclude=eval(?=x)\n")).find("lookaround"), std::string::npos);
    EXPECT_NE(validation_message(simple("exclude=(?<!a)b\n")).find("lookaround"), std::string::npos);
    EXPECT_NO_THROW(parse_rules(simple("exclude=\\\\1\n"))); // escaped backslash then a digit
}

TEST(Coverage, DefaultCatalogCoversTheTaxonomy) {
    const auto facts = validate_taxonomy(default_ruleset());
    EXPECT_TRUE(facts.complete());
    EXPECT_EQ(facts.covered_cwes(), kCweCount);
    EXPECT_EQ(facts.covered_categories(), kCategoryCount);
    EXPECT_EQ(facts.total_rules, default_ruleset().size());
    EXPECT_EQ(default_ruleset().version(), "1");
}

TEST(Coverage, GapIsReported) {
    const RuleSet rs = parse_rules(kMinimal);
    const auto facts = validate_taxonomy(rs);
    EXPECT_FALSE(facts.complete());
    EXPECT_EQ(facts.covered_cwes(), 2u);
    EXPECT_EQ(facts.covered_cwes_of(OwaspCategory::Injection), (std::vector<std::string>{"CWE-095"}));
    try {
        enforce_coverage(rs, "small.rules");
        FAIL();
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("small.rules: catalog does not cover"), std::string::npos);
        EXPECT_NE(msg.find("CWE-020"), std::string::npos);
        EXPECT_EQ(msg.find("CWE-095"), std::string::npos);
    }
}

TEST(Coverage, LoadRulesetEnforcesCoverage) {
    snipscan::testing::TempDir dir;
    text::write_file(dir / "small.rules", kMinimal);
    EXPECT_THROW(load_ruleset(dir / "small.rules"), ValidationError);
    text::write_file(dir / "full.rules", std::string(kDefaultCatalogText));
    EXPECT_EQ(load_ruleset(dir / "full.rules"), default_ruleset());
}

TEST(Format, RoundTripsTheDefaultCatalog) {
    const RuleSet& rs = default_ruleset();
    const RuleSet back = parse_rules(format_ruleset(rs));
    EXPECT_EQ(back, rs);
    EXPECT_EQ(fingerprint(back), fingerprint(rs));
    EXPECT_EQ(format_ruleset(back), format_ruleset(rs));
}

TEST(Format, FingerprintSeesChanges) {
    const RuleSet a = parse_rules(kMinimal);
    auto rules = a.rules();
    rules[0].description = "changed";
    const RuleSet b(rules, a.version());
    EXPECT_NE(fingerprint(a), fingerprint(b));
    EXPECT_EQ(fingerprint(a), fingerprint(parse_rules(kMinimal)));
}

TEST(Format, ReviewFlagIsNotSerialized) {
    DetectionRule r = parse_rules(simple("")).rules()[0];
    r.review_required = true;
    const std::string text = format_rule(r);
    EXPECT_EQ(text.find("review"), std::string::npos);
    EXPECT_EQ(parse_rules(text).rules()[0], r);
}
