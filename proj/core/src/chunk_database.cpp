#include "malrag/chunk_database.hpp"

#include <algorithm>
#include <cmath>

#include "malrag/errors.hpp"

namespace malrag {

double cosine_similarity(std::span<const float> q, std::span<const float> c) {
    if (q.size() != c.size())
        throw Error(Stage::Retrieve, "cosine dimension mismatch: " + std::to_string(q.size()) +
                                         " vs " + std::to_string(c.size()));
    double dot = 0.0, qq = 0.0, cc = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        dot += static_cast<double>(q[i]) * c[i];
        qq += static_cast<double>(q[i]) * q[i];
        cc += static_cast<double>(c[i]) * c[i];
    }
    if (qq == 0.0 || cc == 0.0)
        throw Error(Stage::Retrieve, "cosine of a zero-norm vector is undefined");
    return dot / (std::sqrt(qq) * std::sqrt(cc));
}

std::size_t LevelStats::avg_words() const {
    if (count == 0) return 0;
    return static_cast<std::size_t>(
        std::llround(static_cast<double>(total_words) / static_cast<double>(count)));
}

void ChunkDatabase::ensure_mutable() const {
    if (finalized_) throw Error(Stage::Embed, "chunk database is finalized");
}

void ChunkDatabase::add_chunk(Chunk chunk) {
    ensure_mutable();
    if (auto problem = validate_chunk(chunk); problem && !chunk.is_unfilled_placeholder())
        throw Error(Stage::Parse, *problem);
    auto [it, inserted] = index_by_id_.emplace(chunk.chunk_id, chunks_.size());
    if (!inserted) throw Error(Stage::Parse, "duplicate chunk id " + chunk.chunk_id);
    chunks_.push_back(std::move(chunk));
}

void ChunkDatabase::add_chunks(std::vector<Chunk> chunks) {
    for (auto& c : chunks) add_chunk(std::move(c));
}

const Chunk* ChunkDatabase::find(const std::string& chunk_id) const {
    auto it = index_by_id_.find(chunk_id);
    return it == index_by_id_.end() ? nullptr : &chunks_[it->second];
}

std::vector<Chunk>& ChunkDatabase::chunks_mutable() {
    ensure_mutable();
    return chunks_;
}

void ChunkDatabase::embed_all(EmbedderBackend& backend, std::size_t batch_size) {
    ensure_mutable();
    if (!embedder_id_.empty() && embedder_id_ != backend.backend_id())
        throw Error(Stage::Embed, "database already holds vectors from " + embedder_id_ +
                                      ", refusing to mix in " + backend.backend_id());
    set_embedder_info(backend.backend_id(), backend.dimension());

    if (batch_size == 0) batch_size = 1;
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < chunks_.size(); ++i)
        if (!vectors_.count(chunks_[i].chunk_id)) pending.push_back(i);

    for (std::size_t start = 0; start < pending.size(); start += batch_size) {
        std::size_t end = std::min(start + batch_size, pending.size());
        std::vector<std::string> texts;
        texts.reserve(end - start);
        for (std::size_t j = start; j < end; ++j) texts.push_back(chunks_[pending[j]].text);
        auto vectors = backend.embed(texts);
        if (vectors.size() != texts.size())
            throw BackendError(Stage::Embed,
                               "embedder returned " + std::to_string(vectors.size()) +
                                   " vectors for " + std::to_string(texts.size()) + " texts");
        for (std::size_t j = start; j < end; ++j)
            set_vector(chunks_[pending[j]].chunk_id, std::move(vectors[j - start]));
    }
}

void ChunkDatabase::set_vector(const std::string& chunk_id, std::vector<float> vector) {
    ensure_mutable();
    if (!index_by_id_.count(chunk_id))
        throw Error(Stage::Embed, "vector for unknown chunk " + chunk_id);
    if (dimension_ != 0 && vector.size() != dimension_)
        throw Error(Stage::Embed, "vector for " + chunk_id + " has dimension " +
                                      std::to_string(vector.size()) + ", expected " +
                                      std::to_string(dimension_));
    vectors_[chunk_id] = std::move(vector);
}

const std::vector<float>* ChunkDatabase::vector_of(const std::string& chunk_id) const {
    auto it = vectors_.find(chunk_id);
    return it == vectors_.end() ? nullptr : &it->second;
}

std::vector<EmbeddedChunk> ChunkDatabase::embedded_chunks() const {
    std::vector<EmbeddedChunk> out;
    out.reserve(vectors_.size());
    for (const auto& chunk : chunks_) {
        auto it = vectors_.find(chunk.chunk_id);
        if (it != vectors_.end()) out.push_back({chunk.chunk_id, it->second});
    }
    return out;
}

void ChunkDatabase::set_embedder_info(std::string backend_id, std::size_t dimension) {
    embedder_id_ = std::move(backend_id);
    dimension_ = dimension;
}

void ChunkDatabase::finalize() {
    for (const auto& chunk : chunks_) {
        if (chunk.is_unfilled_placeholder())
            throw Error(Stage::Summarize, "unfilled summary placeholder " + chunk.chunk_id);
        if (!vectors_.count(chunk.chunk_id))
            throw Error(Stage::Embed, "chunk " + chunk.chunk_id + " has no vector");
    }
    finalized_ = true;
}

std::vector<ScoredChunk> ChunkDatabase::score_all(std::span<const float> query_vector,
                                                  const std::set<ChunkLevel>& levels) const {
    std::vector<ScoredChunk> scored;
    for (const auto& chunk : chunks_) {
        if (!levels.count(chunk.level)) continue;
        auto it = vectors_.find(chunk.chunk_id);
        if (it == vectors_.end())
            throw Error(Stage::Retrieve, "chunk " + chunk.chunk_id + " has no vector");
        scored.push_back({chunk.chunk_id, cosine_similarity(query_vector, it->second)});
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.chunk_id < b.chunk_id;
    });
    return scored;
}

std::vector<ScoredChunk> ChunkDatabase::score_all(const std::string& query,
                                                  EmbedderBackend& backend,
                                                  const std::set<ChunkLevel>& levels) const {
    auto vectors = backend.embed({query});
    if (vectors.size() != 1)
        throw BackendError(Stage::Embed, "embedder returned " + std::to_string(vectors.size()) +
                                             " vectors for one query");
    return score_all(vectors[0], levels);
}

LevelStats ChunkDatabase::level_stats(ChunkLevel level) const {
    LevelStats stats;
    for (const auto& chunk : chunks_) {
        if (chunk.level != level) continue;
        stats.count += 1;
        stats.total_words += chunk.words;
    }
    return stats;
}

}  // namespace malrag
