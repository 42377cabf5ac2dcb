#include "malrag/sentence.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "malrag/corpus.hpp"
#include "malrag/errors.hpp"

namespace malrag {

AbbreviationSet::AbbreviationSet(std::vector<std::string> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end());
    entries_.erase(std::unique(entries_.begin(), entries_.end()), entries_.end());
}

const AbbreviationSet& AbbreviationSet::builtin() {
    // Mirrors data/abbreviations.txt; the stop-list test keeps them in sync.
    static const AbbreviationSet set(std::vector<std::string>{
        "Approx.", "Dr.",   "Eq.",   "Eqs.",  "Fig.",  "Figs.",  "Mr.",   "Mrs.",
        "Ms.",     "No.",   "Nos.",  "Ph.D.", "Prof.", "Ref.",   "Refs.", "Sec.",
        "St.",     "Tab.",  "U.S.",  "approx.", "ca.", "cf.",    "e.g.",  "et al.",
        "i.e.",    "resp.", "vs.",
    });
    return set;
}

AbbreviationSet AbbreviationSet::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open abbreviation stop-list: " + path);
    std::vector<std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string trimmed = normalize_whitespace(line);
        if (!trimmed.empty()) entries.push_back(std::move(trimmed));
    }
    return AbbreviationSet(std::move(entries));
}

bool AbbreviationSet::matches_ending_at(std::string_view text, std::size_t end_inclusive) const {
    for (const auto& entry : entries_) {
        const std::size_t len = entry.size();
        if (len == 0 || len > end_inclusive + 1) continue;
        const std::size_t begin = end_inclusive + 1 - len;
        if (text.compare(begin, len, entry) != 0) continue;
        if (begin == 0 || text[begin - 1] == ' ') return true;
    }
    return false;
}

std::vector<std::string> split_sentences(std::string_view text) {
    return split_sentences(text, AbbreviationSet::builtin());
}

std::vector<std::string> split_sentences(std::string_view text,
                                         const AbbreviationSet& abbreviations) {
    const std::string norm = normalize_whitespace(text);
    std::vector<std::string> sentences;
    if (norm.empty()) return sentences;

    std::size_t start = 0;
    for (std::size_t i = 0; i + 2 < norm.size(); ++i) {
        const char c = norm[i];
        if (c != '.' && c != '!' && c != '?') continue;
        if (norm[i + 1] != ' ') continue;  // normalized text has single spaces
        const unsigned char next = static_cast<unsigned char>(norm[i + 2]);
        if (!std::isupper(next) && !std::isdigit(next)) continue;
        if (c == '.' && abbreviations.matches_ending_at(norm, i)) continue;
        sentences.push_back(norm.substr(start, i - start + 1));
        start = i + 2;
    }
    sentences.push_back(norm.substr(start));
    return sentences;
}

}  // namespace malrag
