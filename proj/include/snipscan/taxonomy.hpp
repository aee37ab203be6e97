#pragma once

// The OWASP Top 10 (2021) categories and the 35 CWEs the rule catalog is
// required to cover, with the CWE -> category assignment.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace snipscan {

/// Closed enumeration; declaration order is the canonical report order.
enum class OwaspCategory : std::uint8_t {
    BrokenAccessControl,
    CryptographicFailures,
    IdentificationAndAuthenticationFailures,
    Injection,
    InsecureDesign,
    SecurityLoggingAndMonitoringFailures,
    SecurityMisconfiguration,
    ServerSideRequestForgery,
    SoftwareAndDataIntegrityFailures,
};

inline constexpr std::size_t kCategoryCount = 9;

inline constexpr std::array<OwaspCategory, kCategoryCount> kAllCategories = {
    OwaspCategory::BrokenAccessControl,
    OwaspCategory::CryptographicFailures,
    OwaspCategory::IdentificationAndAuthenticationFailures,
    OwaspCategory::Injection,
    OwaspCategory::InsecureDesign,
    OwaspCategory::SecurityLoggingAndMonitoringFailures,
    OwaspCategory::SecurityMisconfiguration,
    OwaspCategory::ServerSideRequestForgery,
    OwaspCategory::SoftwareAndDataIntegrityFailures,
};

inline constexpr std::string_view to_string(OwaspCategory c) {
    switch (c) {
    case OwaspCategory::BrokenAccessControl: return "Broken Access Control";
    case OwaspCategory::CryptographicFailures: return "Cryptographic Failures";
    case OwaspCategory::IdentificationAndAuthenticationFailures: return "Identification and Authentication Failures";
    case OwaspCategory::Injection: return "Injection";
    case OwaspCategory::InsecureDesign: return "Insecure Design";
    case OwaspCategory::SecurityLoggingAndMonitoringFailures: return "Security Logging and Monitoring Failures";
    case OwaspCategory::SecurityMisconfiguration: return "Security Misconfiguration";
    case OwaspCategory::ServerSideRequestForgery: return "Server-Side Request Forgery";
    case OwaspCategory::SoftwareAndDataIntegrityFailures: return "Software and Data Integrity Failures";
    }
    return "";
}

/// Exact, case-sensitive match against the canonical names.
inline std::optional<OwaspCategory> parse_category(std::string_view name) {
    for (auto c : kAllCategories)
        if (to_string(c) == name)
            return c;
    return std::nullopt;
}

inline constexpr std::size_t index_of(OwaspCategory c) { return static_cast<std::size_t>(c); }

struct CweEntry {
    std::string_view id;
    OwaspCategory category;
};

inline constexpr std::size_t kCweCount = 35;

inline constexpr std::array<CweEntry, kCweCount> kCweTaxonomy = {{
    {"CWE-022", OwaspCategory::BrokenAccessControl},
    {"CWE-377", OwaspCategory::BrokenAccessControl},
    {"CWE-425", OwaspCategory::BrokenAccessControl},
    {"CWE-601", OwaspCategory::BrokenAccessControl},
    {"CWE-319", OwaspCategory::CryptographicFailures},
    {"CWE-321", OwaspCategory::CryptographicFailures},
    {"CWE-326", OwaspCategory::CryptographicFailures},
    {"CWE-327", OwaspCategory::CryptographicFailures},
    {"CWE-329", OwaspCategory::CryptographicFailures},
    {"CWE-330", OwaspCategory::CryptographicFailures},
    {"CWE-347", OwaspCategory::CryptographicFailures},
    {"CWE-759", OwaspCategory::CryptographicFailures},
    {"CWE-760", OwaspCategory::CryptographicFailures},
    {"CWE-295", OwaspCategory::IdentificationAndAuthenticationFailures},
    {"CWE-384", OwaspCategory::IdentificationAndAuthenticationFailures},
    {"CWE-020", OwaspCategory::Injection},
    {"CWE-078", OwaspCategory::Injection},
    {"CWE-079", OwaspCategory::Injection},
    {"CWE-080", OwaspCategory::Injection},
    {"CWE-090", OwaspCategory::Injection},
    {"CWE-094", OwaspCategory::Injection},
    {"CWE-095", OwaspCategory::Injection},
    {"CWE-096", OwaspCategory::Injection},
    {"CWE-099", OwaspCategory::Injection},
    {"CWE-113", OwaspCategory::Injection},
    {"CWE-116", OwaspCategory::Injection},
    {"CWE-643", OwaspCategory::Injection},
    {"CWE-1236", OwaspCategory::Injection},
    {"CWE-209", OwaspCategory::InsecureDesign},
    {"CWE-269", OwaspCategory::InsecureDesign},
    {"CWE-434", OwaspCategory::InsecureDesign},
    {"CWE-117", OwaspCategory::SecurityLoggingAndMonitoringFailures},
    {"CWE-611", OwaspCategory::SecurityMisconfiguration},
    {"CWE-918", OwaspCategory::ServerSideRequestForgery},
    {"CWE-502", OwaspCategory::SoftwareAndDataIntegrityFailures},
}};

/// Canonical spelling: `CWE-` followed by at least three digits.
inline bool is_well_formed_cwe(std::string_view id) {
    if (!id.starts_with("CWE-") || id.size() < 7)
        return false;
    return std::all_of(id.begin() + 4, id.end(), [](char c) { return c >= '0' && c <= '9'; });
}

inline std::optional<OwaspCategory> category_of_cwe(std::string_view id) {
    for (const auto& e : kCweTaxonomy)
        if (e.id == id)
            return e.category;
    return std::nullopt;
}

inline std::vector<std::string_view> cwes_of(OwaspCategory c) {
    std::vector<std::string_view> out;
    for (const auto& e : kCweTaxonomy)
        if (e.category == c)
            out.push_back(e.id);
    return out;
}

/// Orders a set of categories canonically and removes duplicates.
inline std::vector<OwaspCategory> canonical_order(std::vector<OwaspCategory> cats) {
    std::sort(cats.begin(), cats.end());
    cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
    return cats;
}

inline std::string join_categories(const std::vector<OwaspCategory>& cats, std::string_view sep = ",") {
    std::string out;
    for (std::size_t i = 0; i < cats.size(); ++i) {
        if (i)
            out += sep;
        out += to_string(cats[i]);
    }
    return out;
}

} // namespace snipscan
