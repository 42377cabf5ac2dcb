#pragma once

#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "malrag/chunk.hpp"
#include "malrag/embedder.hpp"

namespace malrag {

struct EmbeddedChunk {
    std::string chunk_id;
    std::vector<float> vector;  // stored unit-normalized (L2 norm 1 within 1e-6)
};

/// Cosine similarity q.c / (|q||c|). Errors on zero-norm input; for stored
/// unit vectors this is just the dot product.
double cosine_similarity(std::span<const float> q, std::span<const float> c);

struct ScoredChunk {
    std::string chunk_id;
    double similarity = 0.0;
};

struct LevelStats {
    std::size_t count = 0;
    std::size_t total_words = 0;

    /// Integer-rounded mean word count (the shape that per-level chunk
    /// statistics are reported in).
    std::size_t avg_words() const;
};

/// All chunks of one population plus their vectors. Immutable once finalized;
/// reads (score_all, lookups) are then safe from any number of threads.
class ChunkDatabase {
public:
    void add_chunk(Chunk chunk);
    void add_chunks(std::vector<Chunk> chunks);

    const Chunk* find(const std::string& chunk_id) const;
    const std::vector<Chunk>& chunks() const { return chunks_; }
    std::vector<Chunk>& chunks_mutable();

    /// Embeds every chunk lacking a vector, batching in chunk order.
    /// Idempotent: a re-run with the same backend_id makes zero backend
    /// calls. A backend failure mid-run keeps completed batches, so the call
    /// is retriable and resumes where it stopped.
    void embed_all(EmbedderBackend& backend, std::size_t batch_size);

    void set_vector(const std::string& chunk_id, std::vector<float> vector);
    const std::vector<float>* vector_of(const std::string& chunk_id) const;
    std::vector<EmbeddedChunk> embedded_chunks() const;

    void set_embedder_info(std::string backend_id, std::size_t dimension);
    const std::string& embedder_id() const { return embedder_id_; }
    std::size_t dimension() const { return dimension_; }

    /// Marks the database immutable. Fails if any summary placeholder is
    /// unfilled (naming the chunk) or any chunk lacks a vector.
    void finalize();
    bool finalized() const { return finalized_; }

    /// Exhaustive scoring of an already-embedded query over every chunk whose
    /// level is in `levels`, descending by similarity with ties broken by
    /// ascending chunk_id.
    std::vector<ScoredChunk> score_all(std::span<const float> query_vector,
                                       const std::set<ChunkLevel>& levels) const;

    /// Embeds the query text through `backend` and scores it.
    std::vector<ScoredChunk> score_all(const std::string& query, EmbedderBackend& backend,
                                       const std::set<ChunkLevel>& levels) const;

    LevelStats level_stats(ChunkLevel level) const;
    std::size_t size() const { return chunks_.size(); }

private:
    void ensure_mutable() const;

    std::vector<Chunk> chunks_;
    std::unordered_map<std::string, std::size_t> index_by_id_;
    std::unordered_map<std::string, std::vector<float>> vectors_;
    std::string embedder_id_;
    std::size_t dimension_ = 0;
    bool finalized_ = false;
};

}  // namespace malrag
