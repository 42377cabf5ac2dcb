#include "malrag/retriever.hpp"

#include <algorithm>
#include <cmath>

#include "malrag/errors.hpp"

namespace malrag {

std::vector<ScoredChunk> select_by_budget(const std::vector<ScoredChunk>& scored,
                                          const ChunkDatabase& db, std::size_t budget_words,
                                          PackingRule packing) {
    std::vector<ScoredChunk> picked;
    std::size_t used = 0;
    for (const auto& candidate : scored) {
        const Chunk* chunk = db.find(candidate.chunk_id);
        if (!chunk)
            throw Error(Stage::Retrieve, "scored chunk " + candidate.chunk_id +
                                             " is not in the database");
        if (used + chunk->words > budget_words) {
            if (packing == PackingRule::Stop) break;
            continue;
        }
        used += chunk->words;
        picked.push_back(candidate);
    }
    return picked;
}

std::vector<double> softmax_probabilities(const std::vector<ScoredChunk>& selected) {
    if (selected.empty()) return {};
    double max_score = selected[0].similarity;
    for (const auto& s : selected) max_score = std::max(max_score, s.similarity);
    std::vector<double> probabilities;
    probabilities.reserve(selected.size());
    double z = 0.0;
    for (const auto& s : selected) {
        double e = std::exp(s.similarity - max_score);
        probabilities.push_back(e);
        z += e;
    }
    for (double& p : probabilities) p /= z;
    return probabilities;
}

std::size_t apply_threshold(const std::vector<double>& descending_probabilities,
                            std::optional<double> tau, bool* first_exceeded) {
    if (first_exceeded) *first_exceeded = false;
    if (!tau) return descending_probabilities.size();
    std::size_t kept = 0;
    double cumulative = 0.0;
    for (double p : descending_probabilities) {
        cumulative += p;
        if (cumulative > *tau) break;
        ++kept;
    }
    if (kept == 0 && !descending_probabilities.empty()) {
        kept = 1;
        if (first_exceeded) *first_exceeded = true;
    }
    return kept;
}

RetrievalResult retrieve(const std::string& query, const ChunkDatabase& db,
                         EmbedderBackend& embedder, const RetrieverConfig& cfg) {
    RetrievalResult result;
    result.config = cfg;

    auto scored = db.score_all(query, embedder, cfg.levels);
    auto picked = select_by_budget(scored, db, cfg.budget_words, cfg.packing);
    auto probabilities = softmax_probabilities(picked);

    result.budget_stage.reserve(picked.size());
    double cumulative = 0.0;
    for (std::size_t i = 0; i < picked.size(); ++i) {
        const Chunk* chunk = db.find(picked[i].chunk_id);
        cumulative += probabilities[i];
        RetrievedChunk r;
        r.chunk_id = picked[i].chunk_id;
        r.level = chunk->level;
        r.similarity = picked[i].similarity;
        r.probability = probabilities[i];
        r.cumulative_probability = cumulative;
        r.words = chunk->words;
        result.budget_stage.push_back(std::move(r));
    }
    result.k_budget_selected = picked.size();

    std::size_t kept = apply_threshold(probabilities, cfg.tau, &result.first_chunk_exceeded_tau);
    result.selected.assign(result.budget_stage.begin(),
                           result.budget_stage.begin() + static_cast<std::ptrdiff_t>(kept));
    result.total_words = 0;
    for (const auto& r : result.selected) result.total_words += r.words;
    return result;
}

}  // namespace malrag
