#pragma once

// Sequence kernels used by the pattern miner:
//   * similarity_ratio: Ratcliff-Obershelp matching-blocks ratio 2M/(|a|+|b|),
//     the same measure as Python's difflib.SequenceMatcher.ratio() without the
//     autojunk heuristic;
//   * lcs: textbook dynamic-programming longest common subsequence.
//
// Both are generic over the element type; the string overloads work on
// Unicode code points.

#include <snipscan/text.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace snipscan {

struct MatchingBlock {
    std::size_t a_pos;
    std::size_t b_pos;
    std::size_t size;

    friend bool operator==(const MatchingBlock&, const MatchingBlock&) = default;
};

template <typename T>
struct SimilarityScore {
    double value = 0.0;
    std::set<T> junk;
};

namespace detail {

struct NoJunk {
    template <typename T>
    bool operator()(const T&) const noexcept {
        return false;
    }
};

/// Longest block a[alo,ahi) == b[blo,bhi) whose core contains no junk, then
/// widened by adjacent equal junk. Ties: earliest in a, then earliest in b.
template <typename T, typename IsJunk>
MatchingBlock find_longest_match(std::span<const T> a, std::span<const T> b, std::size_t alo, std::size_t ahi,
                                 std::size_t blo, std::size_t bhi, const IsJunk& is_junk) {
    std::size_t best_i = alo, best_j = blo, best = 0;
    const std::size_t width = bhi - blo;
    std::vector<std::size_t> prev(width + 1, 0), cur(width + 1, 0);
    for (std::size_t i = alo; i < ahi; ++i) {
        for (std::size_t j = blo; j < bhi; ++j) {
            const std::size_t col = j - blo + 1;
            if (a[i] == b[j] && !is_junk(b[j])) {
                const std::size_t k = prev[col - 1] + 1;
                cur[col] = k;
                if (k > best) {
                    best = k;
                    best_i = i + 1 - k;
                    best_j = j + 1 - k;
                }
            } else {
                cur[col] = 0;
            }
        }
        std::swap(prev, cur);
    }
    while (best_i > alo && best_j > blo && is_junk(b[best_j - 1]) && a[best_i - 1] == b[best_j - 1]) {
        --best_i;
        --best_j;
        ++best;
    }
    while (best_i + best < ahi && best_j + best < bhi && is_junk(b[best_j + best]) &&
           a[best_i + best] == b[best_j + best])
        ++best;
    return {best_i, best_j, best};
}

} // namespace detail

/// Matching blocks in increasing order of position, adjacent blocks merged.
/// The terminating zero-size sentinel of difflib is not included.
template <typename T, typename IsJunk = detail::NoJunk>
std::vector<MatchingBlock> matching_blocks(std::span<const T> a, std::span<const T> b, const IsJunk& is_junk = {}) {
    std::vector<MatchingBlock> blocks;
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> queue{{0, a.size(), 0, b.size()}};
    while (!queue.empty()) {
        auto [alo, ahi, blo, bhi] = queue.back();
        queue.pop_back();
        if (alo >= ahi || blo >= bhi)
            continue;
        MatchingBlock m = detail::find_longest_match(a, b, alo, ahi, blo, bhi, is_junk);
        if (m.size == 0)
            continue;
        blocks.push_back(m);
        if (alo < m.a_pos && blo < m.b_pos)
            queue.emplace_back(alo, m.a_pos, blo, m.b_pos);
        if (m.a_pos + m.size < ahi && m.b_pos + m.size < bhi)
            queue.emplace_back(m.a_pos + m.size, ahi, m.b_pos + m.size, bhi);
    }
    std::sort(blocks.begin(), blocks.end(),
              [](const MatchingBlock& x, const MatchingBlock& y) { return std::tie(x.a_pos, x.b_pos) < std::tie(y.a_pos, y.b_pos); });
    std::vector<MatchingBlock> merged;
    for (const auto& m : blocks) {
        if (!merged.empty() && merged.back().a_pos + merged.back().size == m.a_pos &&
            merged.back().b_pos + merged.back().size == m.b_pos)
            merged.back().size += m.size;
        else
            merged.push_back(m);
    }
    return merged;
}

template <typename T, typename IsJunk = detail::NoJunk>
double ratio(std::span<const T> a, std::span<const T> b, const IsJunk& is_junk = {}) {
    const std::size_t total = a.size() + b.size();
    if (total == 0)
        return 1.0;
    std::size_t matched = 0;
    for (const auto& m : matching_blocks(a, b, is_junk))
        matched += m.size;
    return 2.0 * static_cast<double>(matched) / static_cast<double>(total);
}

/// Character-level similarity of two UTF-8 strings. Characters in `junk`
/// cannot anchor a matching block. Note the measure depends on argument
/// order when the longest block is not unique.
inline SimilarityScore<char32_t> similarity_ratio(std::string_view a, std::string_view b,
                                                  std::set<char32_t> junk = {}) {
    const std::u32string ua = text::decode_utf8(a);
    const std::u32string ub = text::decode_utf8(b);
    SimilarityScore<char32_t> score;
    auto is_junk = [&junk](char32_t c) { return junk.contains(c); };
    score.value = ratio<char32_t>(ua, ub, is_junk);
    score.junk = std::move(junk);
    return score;
}

template <typename T>
struct CommonSubsequence {
    std::vector<T> content;
    std::size_t length() const noexcept { return content.size(); }
};

/// Reusable DP table. suffix(i, j) holds the LCS length of a[i..] and b[j..].
/// Reconstruction walks forward from (0, 0), taking every equal pair and,
/// when skipping, advancing in b while that keeps the optimum. This keeps
/// matches as early in `a` as possible.
template <typename T>
class LcsSolver {
public:
    std::size_t length(std::span<const T> a, std::span<const T> b) {
        fill(a, b);
        return at(0, 0);
    }

    CommonSubsequence<T> solve(std::span<const T> a, std::span<const T> b) {
        fill(a, b);
        CommonSubsequence<T> out;
        out.content.reserve(at(0, 0));
        std::size_t i = 0, j = 0;
        while (i < a.size() && j < b.size()) {
            if (a[i] == b[j]) {
                out.content.push_back(a[i]);
                ++i;
                ++j;
            } else if (at(i, j + 1) >= at(i + 1, j)) {
                ++j;
            } else {
                ++i;
            }
        }
        return out;
    }

private:
    void fill(std::span<const T> a, std::span<const T> b) {
        rows_ = a.size() + 1;
        cols_ = b.size() + 1;
        table_.assign(rows_ * cols_, 0);
        for (std::size_t i = a.size(); i-- > 0;) {
            for (std::size_t j = b.size(); j-- > 0;) {
                at(i, j) = a[i] == b[j] ? at(i + 1, j + 1) + 1 : std::max(at(i + 1, j), at(i, j + 1));
            }
        }
    }

    std::uint32_t& at(std::size_t i, std::size_t j) { return table_[i * cols_ + j]; }

    std::vector<std::uint32_t> table_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
};

template <typename T>
CommonSubsequence<T> lcs(std::span<const T> a, std::span<const T> b) {
    return LcsSolver<T>{}.solve(a, b);
}

/// LCS of two UTF-8 strings at code point granularity.
inline std::string lcs(std::string_view a, std::string_view b) {
    const std::u32string ua = text::decode_utf8(a);
    const std::u32string ub = text::decode_utf8(b);
    auto common = lcs<char32_t>(ua, ub);
    return text::encode_utf8(std::u32string_view(common.content.data(), common.content.size()));
}

/// True when `sub` can be obtained from `s` by deleting elements.
template <typename T>
bool is_subsequence(std::span<const T> sub, std::span<const T> s) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < s.size() && k < sub.size(); ++i)
        if (s[i] == sub[k])
            ++k;
    return k == sub.size();
}

inline bool is_subsequence(std::string_view sub, std::string_view s) {
    const auto usub = text::decode_utf8(sub);
    const auto us = text::decode_utf8(s);
    return is_subsequence<char32_t>(usub, us);
}

} // namespace snipscan
