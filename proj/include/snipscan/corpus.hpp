#pragma once

// Snippet corpora in the line-oriented TXT interchange format: UTF-8, one
// snippet per physical line, code line breaks encoded as the two characters
// backslash + 'n'.

#include <snipscan/error.hpp>
#include <snipscan/text.hpp>

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace snipscan {

/// The two-character marker that stands for a code line break.
inline constexpr std::string_view kNewlineMarker = "\\n";

struct Snippet {
    std::size_t id = 0; ///< 1-based line number in the source file
    std::string text;
    std::size_t token_count = 0;

    Snippet() = default;
    Snippet(std::size_t id_, std::string text_)
        : id(id_), text(std::move(text_)), token_count(text::count_whitespace_tokens(text)) {}

    bool empty() const noexcept { return text.empty(); }
    friend bool operator==(const Snippet&, const Snippet&) = default;
};

struct Corpus {
    std::vector<Snippet> snippets;
    std::string source_path;

    std::size_t size() const noexcept { return snippets.size(); }
    auto begin() const { return snippets.begin(); }
    auto end() const { return snippets.end(); }

    /// Equality ignores source_path: two corpora with the same snippets are
    /// the same corpus wherever they were read from.
    friend bool operator==(const Corpus& a, const Corpus& b) { return a.snippets == b.snippets; }
};

/// Replaces every line break (LF, CRLF, lone CR) with the newline marker.
/// No marker is appended after the last line.
inline std::string normalize_to_single_line(std::string_view code) {
    std::string out;
    out.reserve(code.size() + code.size() / 16);
    for (std::size_t i = 0; i < code.size(); ++i) {
        const char c = code[i];
        if (c == '\r') {
            if (i + 1 < code.size() && code[i + 1] == '\n')
                ++i;
            out += kNewlineMarker;
        } else if (c == '\n') {
            out += kNewlineMarker;
        } else {
            out.push_back(c);
        }
    }
    return out;
}

/// Inverse of normalize_to_single_line on normalized text.
inline std::string decode_newline_markers(std::string_view encoded) {
    std::string out;
    out.reserve(encoded.size());
    for (std::size_t i = 0; i < encoded.size(); ++i) {
        if (encoded[i] == '\\' && i + 1 < encoded.size() && encoded[i + 1] == 'n') {
            out.push_back('\n');
            ++i;
        } else {
            out.push_back(encoded[i]);
        }
    }
    return out;
}

/// Builds a corpus from in-memory file content. Blank lines become empty
/// snippets so ids always equal line numbers.
inline Corpus parse_corpus(std::string_view content, std::string origin = "<memory>") {
    if (auto bad = text::first_invalid_utf8(content))
        throw DecodeError(origin, *bad);
    if (content.starts_with("\xEF\xBB\xBF"))
        content.remove_prefix(3);

    Corpus corpus;
    corpus.source_path = std::move(origin);
    std::size_t id = 0;
    for (std::string_view line : text::split_lines(content)) {
        // a stray CR inside a line is a line break too; keep the snippet single-line
        corpus.snippets.emplace_back(++id, normalize_to_single_line(line));
    }
    return corpus;
}

inline Corpus load_snippets(const std::filesystem::path& path) {
    return parse_corpus(text::read_file(path), path.string());
}

inline std::string format_corpus(const Corpus& corpus) {
    std::string out;
    for (const auto& s : corpus.snippets) {
        out += s.text;
        out.push_back('\n');
    }
    return out;
}

inline void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    text::write_file(path, format_corpus(corpus));
}

} // namespace snipscan
