#include "malrag/segmenter.hpp"

#include "malrag/sentence.hpp"

namespace malrag {

namespace {

struct SentenceSpan {
    std::string text;
    std::size_t words = 0;
    std::size_t index = 0;
};

// Greedy left-to-right grouping: extend the current group while it stays at or
// under the target. A single sentence longer than the target forms its own
// group. Groups smaller than min_sentences keep absorbing sentences even past
// the target.
std::vector<IndexRange> group_sentences(const std::vector<SentenceSpan>& sentences,
                                        std::size_t target_words, std::size_t min_sentences) {
    std::vector<IndexRange> groups;
    std::size_t start = 0;
    std::size_t words = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (count >= std::max<std::size_t>(min_sentences, 1) &&
            words + sentences[i].words > target_words) {
            groups.emplace_back(start, i - 1);
            start = i;
            words = 0;
            count = 0;
        }
        words += sentences[i].words;
        ++count;
    }
    if (count > 0) groups.emplace_back(start, sentences.size() - 1);
    return groups;
}

std::string join_sentences(const std::vector<SentenceSpan>& sentences, IndexRange range) {
    std::string out;
    for (std::size_t i = range.first; i <= range.second; ++i) {
        if (!out.empty()) out += ' ';
        out += sentences[i].text;
    }
    return out;
}

std::size_t range_words(const std::vector<SentenceSpan>& sentences, IndexRange range) {
    std::size_t total = 0;
    for (std::size_t i = range.first; i <= range.second; ++i) total += sentences[i].words;
    return total;
}

std::vector<SentenceSpan> to_spans(const std::vector<std::string>& parts,
                                   std::size_t first_index) {
    std::vector<SentenceSpan> spans;
    spans.reserve(parts.size());
    for (const auto& text : parts) {
        SentenceSpan s;
        s.text = text;
        s.words = word_count(text);
        s.index = first_index + spans.size();
        spans.push_back(std::move(s));
    }
    return spans;
}

}  // namespace

std::vector<Chunk> segment_multi_sentence(const Document& document, std::size_t section_index,
                                          const Paragraph& paragraph,
                                          const SegmenterConfig& config) {
    auto spans = to_spans(split_sentences(paragraph.text, config.abbreviations), 0);
    auto groups = group_sentences(spans, config.multi_sentence_target_words,
                                  config.min_sentences_per_chunk);
    std::vector<Chunk> chunks;
    chunks.reserve(groups.size());
    for (const auto& range : groups) {
        Chunk c;
        c.level = ChunkLevel::MultiSentence;
        c.text = join_sentences(spans, range);
        c.words = range_words(spans, range);
        c.provenance.doc_id = document.doc_id;
        c.provenance.section_index = section_index;
        c.provenance.paragraph_range =
            IndexRange{paragraph.paragraph_index, paragraph.paragraph_index};
        c.provenance.sentence_range = range;
        c.chunk_id = multi_sentence_chunk_id(document.doc_id, section_index,
                                             paragraph.paragraph_index, range);
        chunks.push_back(std::move(c));
    }
    return chunks;
}

std::vector<Chunk> segment_paragraphs(const Document& document) {
    std::vector<Chunk> chunks;
    for (const auto& section : document.sections) {
        for (const auto& paragraph : section.paragraphs) {
            Chunk c;
            c.level = ChunkLevel::Paragraph;
            c.text = paragraph.text;
            c.words = word_count(paragraph.text);
            c.provenance.doc_id = document.doc_id;
            c.provenance.section_index = section.section_index;
            c.provenance.paragraph_range =
                IndexRange{paragraph.paragraph_index, paragraph.paragraph_index};
            c.chunk_id = paragraph_chunk_id(document.doc_id, section.section_index,
                                            paragraph.paragraph_index);
            chunks.push_back(std::move(c));
        }
    }
    return chunks;
}

std::vector<Chunk> make_summary_placeholders(const Document& document) {
    std::vector<Chunk> chunks;
    for (const auto& section : document.sections) {
        Chunk c;
        c.level = ChunkLevel::Section;
        c.is_summary = true;
        c.provenance.doc_id = document.doc_id;
        c.provenance.section_index = section.section_index;
        c.chunk_id = section_chunk_id(document.doc_id, section.section_index);
        chunks.push_back(std::move(c));
    }
    Chunk d;
    d.level = ChunkLevel::Document;
    d.is_summary = true;
    d.provenance.doc_id = document.doc_id;
    d.chunk_id = document_chunk_id(document.doc_id);
    chunks.push_back(std::move(d));
    return chunks;
}

std::vector<Chunk> segment_document(const Document& document, const SegmenterConfig& config) {
    std::vector<Chunk> chunks = segment_paragraphs(document);
    for (const auto& section : document.sections) {
        for (const auto& paragraph : section.paragraphs) {
            auto multi =
                segment_multi_sentence(document, section.section_index, paragraph, config);
            chunks.insert(chunks.end(), std::make_move_iterator(multi.begin()),
                          std::make_move_iterator(multi.end()));
        }
    }
    auto placeholders = make_summary_placeholders(document);
    chunks.insert(chunks.end(), std::make_move_iterator(placeholders.begin()),
                  std::make_move_iterator(placeholders.end()));
    return chunks;
}

std::vector<Chunk> segment_vanilla(const Document& document, const SegmenterConfig& config) {
    std::vector<SentenceSpan> spans;
    for (const auto& section : document.sections) {
        for (const auto& paragraph : section.paragraphs) {
            auto parts = split_sentences(paragraph.text, config.abbreviations);
            auto more = to_spans(parts, spans.size());
            spans.insert(spans.end(), std::make_move_iterator(more.begin()),
                         std::make_move_iterator(more.end()));
        }
    }
    auto groups = group_sentences(spans, config.multi_sentence_target_words,
                                  config.min_sentences_per_chunk);
    std::vector<Chunk> chunks;
    chunks.reserve(groups.size());
    for (const auto& range : groups) {
        Chunk c;
        c.level = ChunkLevel::MultiSentence;
        c.text = join_sentences(spans, range);
        c.words = range_words(spans, range);
        c.provenance.doc_id = document.doc_id;
        c.provenance.sentence_range = range;
        c.chunk_id = vanilla_chunk_id(document.doc_id, range);
        chunks.push_back(std::move(c));
    }
    return chunks;
}

}  // namespace malrag
