#include "malrag/chunk.hpp"

#include <stdexcept>

namespace malrag {

std::string_view level_name(ChunkLevel level) {
    switch (level) {
        case ChunkLevel::MultiSentence: return "multi_sentence";
        case ChunkLevel::Paragraph: return "paragraph";
        case ChunkLevel::Section: return "section";
        case ChunkLevel::Document: return "document";
    }
    throw std::invalid_argument("unknown chunk level");
}

std::optional<ChunkLevel> level_from_name(std::string_view name) {
    if (name == "multi_sentence") return ChunkLevel::MultiSentence;
    if (name == "paragraph") return ChunkLevel::Paragraph;
    if (name == "section") return ChunkLevel::Section;
    if (name == "document") return ChunkLevel::Document;
    return std::nullopt;
}

std::string document_chunk_id(std::string_view doc_id) { return std::string(doc_id) + "/d"; }

std::string section_chunk_id(std::string_view doc_id, std::size_t section_index) {
    return std::string(doc_id) + "/s" + std::to_string(section_index);
}

std::string paragraph_chunk_id(std::string_view doc_id, std::size_t section_index,
                               std::size_t paragraph_index) {
    return section_chunk_id(doc_id, section_index) + "/p" + std::to_string(paragraph_index);
}

std::string multi_sentence_chunk_id(std::string_view doc_id, std::size_t section_index,
                                    std::size_t paragraph_index, IndexRange sentence_range) {
    return paragraph_chunk_id(doc_id, section_index, paragraph_index) + "/m" +
           std::to_string(sentence_range.first) + "-" + std::to_string(sentence_range.second);
}

std::string vanilla_chunk_id(std::string_view doc_id, IndexRange sentence_range) {
    return std::string(doc_id) + "/v" + std::to_string(sentence_range.first) + "-" +
           std::to_string(sentence_range.second);
}

std::optional<std::string> validate_chunk(const Chunk& chunk) {
    if (chunk.chunk_id.empty()) return "chunk has empty chunk_id";
    if (chunk.provenance.doc_id.empty())
        return "chunk " + chunk.chunk_id + " has empty provenance doc_id";
    const bool summary_level =
        chunk.level == ChunkLevel::Document || chunk.level == ChunkLevel::Section;
    if (chunk.is_summary != summary_level)
        return "chunk " + chunk.chunk_id + " has is_summary inconsistent with its level";
    if (!chunk.is_summary && chunk.text.empty())
        return "chunk " + chunk.chunk_id + " has empty text";
    if (!chunk.text.empty() && chunk.words == 0)
        return "chunk " + chunk.chunk_id + " has text but zero word count";
    switch (chunk.level) {
        case ChunkLevel::Document:
            if (chunk.provenance.section_index)
                return "document chunk " + chunk.chunk_id + " carries a section index";
            break;
        case ChunkLevel::Section:
            if (!chunk.provenance.section_index)
                return "section chunk " + chunk.chunk_id + " lacks a section index";
            break;
        case ChunkLevel::Paragraph:
            if (!chunk.provenance.section_index || !chunk.provenance.paragraph_range)
                return "paragraph chunk " + chunk.chunk_id + " lacks paragraph provenance";
            break;
        case ChunkLevel::MultiSentence:
            if (!chunk.provenance.sentence_range)
                return "multi-sentence chunk " + chunk.chunk_id + " lacks a sentence range";
            break;
    }
    if (chunk.provenance.sentence_range &&
        chunk.provenance.sentence_range->first > chunk.provenance.sentence_range->second)
        return "chunk " + chunk.chunk_id + " has an inverted sentence range";
    if (chunk.provenance.paragraph_range &&
        chunk.provenance.paragraph_range->first > chunk.provenance.paragraph_range->second)
        return "chunk " + chunk.chunk_id + " has an inverted paragraph range";
    return std::nullopt;
}

}  // namespace malrag
