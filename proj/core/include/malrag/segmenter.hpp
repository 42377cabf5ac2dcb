#pragma once

#include <vector>

#include "malrag/chunk.hpp"
#include "malrag/corpus.hpp"
#include "malrag/sentence.hpp"

namespace malrag {

struct SegmenterConfig {
    /// Greedy grouping target for multi-sentence chunks, in words. The
    /// default sits near the observed multi-sentence average of real corpora.
    std::size_t multi_sentence_target_words = 350;
    std::size_t min_sentences_per_chunk = 1;
    AbbreviationSet abbreviations = AbbreviationSet::builtin();
};

/// One MultiSentenceLevel chunk per greedy sentence group of the paragraph.
/// Sentences are appended in order until the next one would push the chunk
/// past the target; a single sentence longer than the target becomes its own
/// chunk. Groups never cross the paragraph boundary.
std::vector<Chunk> segment_multi_sentence(const Document& document, std::size_t section_index,
                                          const Paragraph& paragraph, const SegmenterConfig& cfg);

/// One ParagraphLevel chunk per paragraph, text verbatim.
std::vector<Chunk> segment_paragraphs(const Document& document);

/// One empty SectionLevel placeholder per section plus one DocumentLevel
/// placeholder. The summarizer fills them; a database refuses to finalize
/// while any remain unfilled.
std::vector<Chunk> make_summary_placeholders(const Document& document);

/// All four populations for one document: paragraph chunks, multi-sentence
/// chunks, then the summary placeholders.
std::vector<Chunk> segment_document(const Document& document, const SegmenterConfig& cfg);

/// The Vanilla-RAG baseline chunking: the whole document is split into
/// sentences which are merged greedily to the target size with no regard for
/// paragraph or section boundaries. Provenance carries doc_id plus a
/// document-global sentence range. These chunks live in their own population,
/// separate from the four abstraction levels.
std::vector<Chunk> segment_vanilla(const Document& document, const SegmenterConfig& cfg);

}  // namespace malrag
