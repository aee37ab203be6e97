#pragma once

#include <snipscan/rules.hpp>

#include <string_view>

namespace snipscan {

/// Text of the shipped catalog (rules/default.rules), embedded at build time.
inline constexpr std::string_view kDefaultCatalogText =
#include <snipscan/default_catalog.inc>
    ;

/// The shipped catalog, parsed and coverage-checked once.
inline const RuleSet& default_ruleset() {
    static const RuleSet rs = [] {
        RuleSet parsed = parse_rules(kDefaultCatalogText, "<embedded catalog>");
        enforce_coverage(parsed, "<embedded catalog>");
        return parsed;
    }();
    return rs;
}

} // namespace snipscan
