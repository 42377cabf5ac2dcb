#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace malrag {

/// The four abstraction levels, ordered Document > Section > Paragraph >
/// MultiSentence by abstraction.
enum class ChunkLevel : int {
    MultiSentence = 0,
    Paragraph = 1,
    Section = 2,
    Document = 3,
};

std::string_view level_name(ChunkLevel level);
std::optional<ChunkLevel> level_from_name(std::string_view name);

using IndexRange = std::pair<std::size_t, std::size_t>;  // inclusive [start, end]

/// Where a chunk came from. Which fields are present depends on the level:
/// document-level carries doc_id only; section-level adds section_index;
/// paragraph-level a width-1 paragraph_range; multi-sentence-level a
/// sentence_range within its paragraph. Vanilla-baseline chunks carry doc_id
/// plus a document-global sentence_range.
struct Provenance {
    std::string doc_id;
    std::optional<std::size_t> section_index;
    std::optional<IndexRange> paragraph_range;
    std::optional<IndexRange> sentence_range;

    bool operator==(const Provenance&) const = default;
};

struct Chunk {
    std::string chunk_id;  // deterministic function of provenance + level
    ChunkLevel level = ChunkLevel::MultiSentence;
    std::string text;  // empty only while a summary placeholder is unfilled
    std::size_t words = 0;
    Provenance provenance;
    bool is_summary = false;  // true iff level is Document or Section

    bool is_unfilled_placeholder() const { return is_summary && text.empty(); }

    bool operator==(const Chunk&) const = default;
};

/// Deterministic chunk ids, derived from provenance + level:
///   <doc_id>/d                          document summary
///   <doc_id>/s<n>                       section summary
///   <doc_id>/s<n>/p<k>                  paragraph
///   <doc_id>/s<n>/p<k>/m<a>-<b>         multi-sentence (sentence range)
///   <doc_id>/v<a>-<b>                   vanilla baseline (global sentences)
std::string document_chunk_id(std::string_view doc_id);
std::string section_chunk_id(std::string_view doc_id, std::size_t section_index);
std::string paragraph_chunk_id(std::string_view doc_id, std::size_t section_index,
                               std::size_t paragraph_index);
std::string multi_sentence_chunk_id(std::string_view doc_id, std::size_t section_index,
                                    std::size_t paragraph_index, IndexRange sentence_range);
std::string vanilla_chunk_id(std::string_view doc_id, IndexRange sentence_range);

/// Checks the per-level provenance shape and the is_summary/level coupling.
/// Returns an explanation for the first violated rule, or nothing when valid.
std::optional<std::string> validate_chunk(const Chunk& chunk);

}  // namespace malrag
