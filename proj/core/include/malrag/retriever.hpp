#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "malrag/chunk_database.hpp"

namespace malrag {

/// Budget packing rule. Skip walks past a chunk that does not fit and keeps
/// trying further down the score list; Stop ends selection at the first
/// overflow.
enum class PackingRule { Skip, Stop };

struct RetrieverConfig {
    std::size_t budget_words = 10000;        // length constraint C
    std::optional<double> tau = 0.5;         // cumulative-probability cutoff, nullopt disables
    std::set<ChunkLevel> levels = {ChunkLevel::Document, ChunkLevel::Section,
                                   ChunkLevel::Paragraph, ChunkLevel::MultiSentence};
    PackingRule packing = PackingRule::Skip;
};

struct RetrievedChunk {
    std::string chunk_id;
    ChunkLevel level = ChunkLevel::MultiSentence;
    double similarity = 0.0;
    double probability = 0.0;
    double cumulative_probability = 0.0;
    std::size_t words = 0;
};

struct RetrievalResult {
    std::vector<RetrievedChunk> selected;      // final selection, post-threshold
    std::vector<RetrievedChunk> budget_stage;  // all k budget-selected chunks; selected is a prefix
    std::size_t total_words = 0;               // over the final selection, always <= C
    std::size_t k_budget_selected = 0;
    bool first_chunk_exceeded_tau = false;     // the always-keep-first rule fired
    RetrieverConfig config;
};

/// Greedy selection in score order under the word budget. With the Skip rule
/// a chunk that does not fit is passed over and the walk continues, so at
/// least one chunk is returned whenever any single chunk fits the budget.
std::vector<ScoredChunk> select_by_budget(const std::vector<ScoredChunk>& scored,
                                          const ChunkDatabase& db, std::size_t budget_words,
                                          PackingRule packing = PackingRule::Skip);

/// Softmax over exactly the k selected chunks, computed in the max-subtracted
/// form (algebraically identical, numerically stable). Probabilities sum to 1
/// within 1e-9.
std::vector<double> softmax_probabilities(const std::vector<ScoredChunk>& selected);

/// Maximal prefix whose cumulative probability stays within tau. The first
/// chunk is always retained even when its probability alone exceeds tau, so
/// the context is never empty; `first_exceeded` reports when that rule fired.
std::size_t apply_threshold(const std::vector<double>& descending_probabilities,
                            std::optional<double> tau, bool* first_exceeded = nullptr);

/// Full pipeline: score_all -> select_by_budget -> softmax -> threshold.
/// The result keeps every intermediate quantity for audit.
RetrievalResult retrieve(const std::string& query, const ChunkDatabase& db,
                         EmbedderBackend& embedder, const RetrieverConfig& cfg);

}  // namespace malrag
