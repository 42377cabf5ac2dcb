#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace malrag {

/// Abbreviations that suppress a split after '.'. Entries may contain
/// internal spaces ("et al.") and are matched case-sensitively against the
/// text ending at the candidate period.
class AbbreviationSet {
public:
    AbbreviationSet() = default;
    explicit AbbreviationSet(std::vector<std::string> entries);

    /// The list shipped with the library (see data/abbreviations.txt).
    static const AbbreviationSet& builtin();

    /// Loads a stop-list file: UTF-8, one abbreviation per line, '#' comments.
    static AbbreviationSet load(const std::string& path);

    /// True if text[0..end_inclusive] ends with a stop-list entry preceded by
    /// a space or the start of the text.
    bool matches_ending_at(std::string_view text, std::size_t end_inclusive) const;

    const std::vector<std::string>& entries() const { return entries_; }

private:
    std::vector<std::string> entries_;  // sorted, deduplicated
};

/// Rule-based sentence splitter: a sentence ends at '.', '!' or '?' followed
/// by whitespace and then an uppercase letter or digit, unless the token
/// ending at a '.' is a known abbreviation. The concatenation of the returned
/// sentences joined by single spaces equals the whitespace-normalized input;
/// text with no terminator comes back as one sentence.
std::vector<std::string> split_sentences(std::string_view text);
std::vector<std::string> split_sentences(std::string_view text, const AbbreviationSet& abbreviations);

}  // namespace malrag
