#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace malrag {

struct Paragraph {
    std::size_t paragraph_index = 0;
    std::string text;  // whitespace-normalized, non-empty

    bool operator==(const Paragraph&) const = default;
};

struct Section {
    std::size_t section_index = 0;
    std::string heading;  // may be empty
    std::vector<Paragraph> paragraphs;

    bool operator==(const Section&) const = default;
};

struct Document {
    std::string doc_id;
    std::string title;
    std::vector<Section> sections;

    bool operator==(const Document&) const = default;
};

/// Number of maximal whitespace-delimited tokens. The single counting rule
/// shared by every module (budget C, per-level stats). Whitespace covers
/// ASCII space/tab/newlines plus the common Unicode space code points.
std::size_t word_count(std::string_view text);

/// Collapses runs of whitespace to single ASCII spaces and trims the ends.
std::string normalize_whitespace(std::string_view text);

/// Parses the corpus interchange format: UTF-8, one JSON record per line,
/// fields doc_id / title / sections[{heading, paragraphs[]}]. Paragraph text
/// is normalized on ingestion. Errors carry the offending line number.
std::vector<Document> parse_corpus_file(std::istream& in);
std::vector<Document> parse_corpus_file(const std::string& path);

/// Re-serializes documents in the interchange format (one record per line,
/// LF terminators).
void write_corpus_file(const std::vector<Document>& documents, std::ostream& out);
void write_corpus_file(const std::vector<Document>& documents, const std::string& path);

}  // namespace malrag
