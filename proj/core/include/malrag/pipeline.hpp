#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include "malrag/answer.hpp"
#include "malrag/backends_http.hpp"
#include "malrag/chunk_store.hpp"
#include "malrag/evaluator.hpp"
#include "malrag/retriever.hpp"
#include "malrag/segmenter.hpp"

namespace malrag {

struct ExtractorChoice {
    std::string kind = "mock";  // mock | http
    HttpBackendConfig http;
    std::map<std::string, std::string> template_files;  // task kind name -> path
};

struct EmbedderChoice {
    std::string kind = "mock";  // mock | http
    std::size_t dimension = 256;
    HttpBackendConfig http;
};

struct ChatChoice {
    std::string kind = "echo";  // echo | scripted | http
    std::string transcript_path;
    HttpBackendConfig http;
};

struct JudgeChoice {
    std::string kind = "exact";  // exact | http
    HttpBackendConfig http;
};

struct PipelineConfig {
    std::string corpus_path;
    std::string store_dir = "malrag_store";
    ExtractorChoice extractor;
    EmbedderChoice embedder;
    ChatChoice chat;
    JudgeChoice judge;
    SegmenterConfig segmenter;
    std::string abbreviations_path;  // overrides the built-in stop-list
    RetrieverConfig retriever;
    bool retrieve_vanilla = false;  // retrieve over the baseline population instead of MAL levels
    std::string answer_template_path;
    std::string icl_examples_path;
    std::size_t embed_batch_size = 64;
    std::size_t parallelism = 1;
    bool build_vanilla = true;  // index the Vanilla-baseline population alongside the four levels
};

/// Reads a config file (JSON object mirroring PipelineConfig) and applies it
/// over the defaults.
PipelineConfig load_pipeline_config(const std::string& path);

/// Stable fingerprint of the settings that shape a store's contents.
std::string config_fingerprint(const PipelineConfig& config);

std::unique_ptr<ExtractorBackend> make_extractor(const PipelineConfig& config);
std::unique_ptr<EmbedderBackend> make_embedder(const PipelineConfig& config);
std::unique_ptr<ChatBackend> make_chat_backend(const PipelineConfig& config);
std::unique_ptr<StatementJudge> make_judge(const PipelineConfig& config);

/// Level selection for retrieval: either the Vanilla-baseline population or a
/// subset of the four abstraction levels.
struct LevelSelection {
    bool vanilla = false;
    std::set<ChunkLevel> levels = {ChunkLevel::Document, ChunkLevel::Section,
                                   ChunkLevel::Paragraph, ChunkLevel::MultiSentence};
};

/// `all`, `document`, `section`, `paragraph`, `multi`, or `vanilla`.
LevelSelection parse_level_selection(const std::string& name);

/// Experiment presets: {vanilla, document, section, paragraph, multi, mal} x
/// {tau05, notau}, spelled e.g. `mal-tau05`, `paragraph-notau`.
struct Preset {
    LevelSelection selection;
    std::optional<double> tau;
};
Preset parse_preset(const std::string& name);

// ---------------------------------------------------------------------------
// Commands. Errors are thrown as malrag::Error carrying the stage whose exit
// code the CLI reports.
// ---------------------------------------------------------------------------

/// parse -> segment -> summarize -> embed -> finalize. Emits the manifest
/// last; re-running on a finalized store is a no-op. Resumable: completed
/// record files are reused after a crash or backend failure.
StoreManifest cmd_index(const PipelineConfig& config);

struct QueryOutput {
    AnswerRecord answer;
    RetrievalResult retrieval;
};

/// retrieve then generate against a finalized store.
QueryOutput cmd_query(const PipelineConfig& config, const std::string& question);

struct EvalOptions {
    std::string qa_path;
    std::optional<std::string> preset;
    bool gold_context = false;  // ground truth supplied as the retrieved context
    std::string report_path;
    std::string audit_path;  // optional retrieval audit records, one per question
};

/// For each question: retrieve -> answer -> evaluate. Per-question failures
/// are recorded and the run continues.
EvalReport cmd_eval(const PipelineConfig& config, const EvalOptions& options);

/// Four-row per-level table (count, average words), cross-checked against the
/// manifest.
void cmd_stats(const PipelineConfig& config, std::ostream& out);

/// One retrieval audit record in JSON form (the newline-delimited audit file
/// holds one per line).
std::string retrieval_audit_json(const std::string& question, const RetrievalResult& result);

}  // namespace malrag
