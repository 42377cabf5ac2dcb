#include "malrag/summarizer.hpp"

#include <atomic>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "malrag/errors.hpp"
#include "malrag/sentence.hpp"

namespace malrag {

std::string_view task_kind_name(TaskKind kind) {
    switch (kind) {
        case TaskKind::ParagraphSummary: return "paragraph_summary";
        case TaskKind::SectionAggregate: return "section_aggregate";
        case TaskKind::DocumentAggregate: return "document_aggregate";
    }
    return "unknown";
}

namespace {

std::string join_texts(const std::vector<std::string>& texts) {
    std::string out;
    for (const auto& t : texts) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

std::string truncate_words(const std::string& text, std::size_t max_words) {
    std::istringstream in(text);
    std::string word;
    std::string out;
    std::size_t count = 0;
    while (count < max_words && in >> word) {
        if (!out.empty()) out += ' ';
        out += word;
        ++count;
    }
    return out;
}

}  // namespace

std::string MockExtractiveBackend::extract(TaskKind kind,
                                           const std::vector<std::string>& input_texts) {
    if (input_texts.empty())
        throw BackendError(Stage::Summarize, "extractor called with no input");
    std::string joined = join_texts(input_texts);
    if (kind == TaskKind::ParagraphSummary) {
        auto sentences = split_sentences(joined);
        return sentences.empty() ? joined : sentences.front();
    }
    return truncate_words(joined, max_words_);
}

std::string summarize_section(const std::vector<Chunk>& section_paragraph_chunks,
                              ExtractorBackend& backend) {
    if (section_paragraph_chunks.empty())
        throw BackendError(Stage::Summarize, "section has no paragraph chunks");
    std::vector<std::string> paragraph_summaries;
    paragraph_summaries.reserve(section_paragraph_chunks.size());
    for (const auto& chunk : section_paragraph_chunks)
        paragraph_summaries.push_back(
            backend.extract(TaskKind::ParagraphSummary, {chunk.text}));
    return backend.extract(TaskKind::SectionAggregate, paragraph_summaries);
}

std::string summarize_document(const std::vector<std::string>& section_summaries,
                               ExtractorBackend& backend) {
    if (section_summaries.empty())
        throw BackendError(Stage::Summarize, "document has no section summaries");
    return backend.extract(TaskKind::DocumentAggregate, section_summaries);
}

namespace {

struct StagedFill {
    std::size_t chunk_index = 0;
    std::string text;
};

struct DocOutcome {
    bool failed = false;
    std::string error;
    std::vector<StagedFill> fills;
    std::vector<SummaryRecord> records;
};

DocOutcome process_document(const Document& document, const std::vector<Chunk>& chunks,
                            const std::unordered_map<std::string, std::size_t>& index,
                            ExtractorBackend& backend) {
    DocOutcome out;
    auto locate = [&](const std::string& chunk_id) {
        auto it = index.find(chunk_id);
        if (it == index.end())
            throw BackendError(Stage::Summarize, "missing chunk " + chunk_id);
        return it->second;
    };

    std::vector<std::string> section_summaries;
    std::vector<std::string> section_ids;
    for (const auto& section : document.sections) {
        std::string sec_id = section_chunk_id(document.doc_id, section.section_index);
        std::size_t sec_index = locate(sec_id);
        section_ids.push_back(sec_id);

        if (!chunks[sec_index].is_unfilled_placeholder()) {
            section_summaries.push_back(chunks[sec_index].text);
            continue;
        }
        std::vector<Chunk> paragraph_chunks;
        std::vector<std::string> paragraph_ids;
        for (const auto& paragraph : section.paragraphs) {
            std::string pid = paragraph_chunk_id(document.doc_id, section.section_index,
                                                 paragraph.paragraph_index);
            paragraph_chunks.push_back(chunks[locate(pid)]);
            paragraph_ids.push_back(std::move(pid));
        }
        std::string summary = summarize_section(paragraph_chunks, backend);
        out.fills.push_back({sec_index, summary});
        out.records.push_back(
            {sec_id, backend.backend_id(), std::move(paragraph_ids), TaskKind::SectionAggregate});
        section_summaries.push_back(std::move(summary));
    }

    std::string doc_id_chunk = document_chunk_id(document.doc_id);
    std::size_t doc_index = locate(doc_id_chunk);
    if (chunks[doc_index].is_unfilled_placeholder()) {
        std::string summary = summarize_document(section_summaries, backend);
        out.fills.push_back({doc_index, std::move(summary)});
        out.records.push_back({doc_id_chunk, backend.backend_id(), std::move(section_ids),
                               TaskKind::DocumentAggregate});
    }
    return out;
}

}  // namespace

FillResult fill_placeholders(const std::vector<Document>& documents, std::vector<Chunk>& chunks,
                             ExtractorBackend& backend, std::size_t parallelism) {
    std::unordered_map<std::string, std::size_t> index;
    index.reserve(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) index[chunks[i].chunk_id] = i;

    std::vector<DocOutcome> outcomes(documents.size());
    auto run_one = [&](std::size_t i) {
        try {
            outcomes[i] = process_document(documents[i], chunks, index, backend);
        } catch (const std::exception& e) {
            outcomes[i].failed = true;
            outcomes[i].error = e.what();
        }
    };

    std::size_t workers = backend.single_flight() ? 1 : std::max<std::size_t>(parallelism, 1);
    workers = std::min(workers, documents.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < documents.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            threads.emplace_back([&] {
                for (std::size_t i = next++; i < documents.size(); i = next++) run_one(i);
            });
        for (auto& t : threads) t.join();
    }

    FillResult result;
    for (std::size_t i = 0; i < documents.size(); ++i) {
        auto& outcome = outcomes[i];
        if (outcome.failed) {
            result.failed_doc_ids.push_back(documents[i].doc_id);
            continue;
        }
        for (auto& fill : outcome.fills) {
            chunks[fill.chunk_index].words = word_count(fill.text);
            chunks[fill.chunk_index].text = std::move(fill.text);
        }
        result.records.insert(result.records.end(),
                              std::make_move_iterator(outcome.records.begin()),
                              std::make_move_iterator(outcome.records.end()));
    }
    return result;
}

}  // namespace malrag
