#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "malrag/chunk.hpp"
#include "malrag/corpus.hpp"

namespace malrag {

enum class TaskKind {
    ParagraphSummary,   // map: one paragraph in, its key information out
    SectionAggregate,   // reduce over a section's paragraph summaries
    DocumentAggregate,  // reduce over a document's section summaries
};

std::string_view task_kind_name(TaskKind kind);

/// Key-information extractor contract. Backends must return non-empty output
/// for non-empty input and either be safely callable from multiple threads or
/// declare single_flight().
class ExtractorBackend {
public:
    virtual ~ExtractorBackend() = default;

    virtual std::string extract(TaskKind kind, const std::vector<std::string>& input_texts) = 0;
    virtual std::string backend_id() const = 0;
    virtual bool deterministic() const { return false; }
    virtual bool single_flight() const { return false; }
};

/// Deterministic extractive mock: map takes the first sentence of the
/// paragraph; reduce concatenates its inputs and truncates to max_words.
/// Makes the whole pipeline reproducible offline.
class MockExtractiveBackend : public ExtractorBackend {
public:
    explicit MockExtractiveBackend(std::size_t max_words = 60) : max_words_(max_words) {}

    std::string extract(TaskKind kind, const std::vector<std::string>& input_texts) override;
    std::string backend_id() const override { return "mock-extractive"; }
    bool deterministic() const override { return true; }

private:
    std::size_t max_words_;
};

/// Audit record written per filled summary chunk.
struct SummaryRecord {
    std::string chunk_id;
    std::string backend_id;
    std::vector<std::string> input_chunk_ids;  // structural children, one level below
    TaskKind prompt_kind = TaskKind::SectionAggregate;
};

/// Two-stage map-reduce over one section: per-paragraph extraction, then a
/// section aggregate over the paragraph summaries in order.
std::string summarize_section(const std::vector<Chunk>& section_paragraph_chunks,
                              ExtractorBackend& backend);

/// Document aggregate over the section summaries, order preserved. Document
/// summaries are computed only from section summaries, never from paragraphs.
std::string summarize_document(const std::vector<std::string>& section_summaries,
                               ExtractorBackend& backend);

struct FillResult {
    std::vector<SummaryRecord> records;
    std::vector<std::string> failed_doc_ids;  // backend failures, rest of batch unaffected
};

/// Fills every Section/Document placeholder in `chunks` in place. A backend
/// failure aborts the document being processed but not the batch; failed
/// documents are reported in the result. `parallelism` bounds concurrent
/// per-document work (single-flight backends force 1).
FillResult fill_placeholders(const std::vector<Document>& documents, std::vector<Chunk>& chunks,
                             ExtractorBackend& backend, std::size_t parallelism = 1);

}  // namespace malrag
