#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "malrag/chunk_database.hpp"
#include "malrag/summarizer.hpp"

namespace malrag {

/// Per-level counts and average word lengths, the same shape per-level chunk
/// statistics are reported in.
struct ManifestLevel {
    std::size_t count = 0;
    std::size_t avg_words = 0;
    std::size_t total_words = 0;
};

struct StoreManifest {
    std::uint32_t version = 1;
    std::string corpus_hash;
    std::string config_hash;
    std::string embedder_id;
    std::size_t embedder_dimension = 0;
    std::string extractor_id;
    std::map<ChunkLevel, ManifestLevel> levels;
    ManifestLevel vanilla;
    std::size_t document_count = 0;
};

/// On-disk chunk store: an append-only directory of record files plus a
/// manifest written last, which doubles as the finalized marker. Crash-safe
/// resume keys off which files exist.
///
///   chunks.jsonl           one JSON record per chunk (four levels)
///   summaries.jsonl        one record per filled summary chunk
///   vectors.malv           binary vector store for the four levels
///   vanilla_chunks.jsonl   Vanilla-baseline population
///   vanilla_vectors.malv   its vectors
///   manifest.json          counts, hashes, backend ids; written last
class ChunkStore {
public:
    static constexpr const char* kChunksFile = "chunks.jsonl";
    static constexpr const char* kSummariesFile = "summaries.jsonl";
    static constexpr const char* kVectorsFile = "vectors.malv";
    static constexpr const char* kVanillaChunksFile = "vanilla_chunks.jsonl";
    static constexpr const char* kVanillaVectorsFile = "vanilla_vectors.malv";
    static constexpr const char* kManifestFile = "manifest.json";

    static bool is_finalized(const std::filesystem::path& dir);

    static void write_chunks(const std::vector<Chunk>& chunks, const std::filesystem::path& file);
    static std::vector<Chunk> read_chunks(const std::filesystem::path& file);

    static void write_summary_records(const std::vector<SummaryRecord>& records,
                                      const std::filesystem::path& file);
    static std::vector<SummaryRecord> read_summary_records(const std::filesystem::path& file);

    static void write_manifest(const StoreManifest& manifest, const std::filesystem::path& dir);
    static StoreManifest read_manifest(const std::filesystem::path& dir);

    /// Loads a finalized store. `mal` holds the four-level database; `vanilla`
    /// the baseline population (empty when the store was built without one).
    struct Loaded {
        ChunkDatabase mal;
        ChunkDatabase vanilla;
        StoreManifest manifest;
        std::vector<SummaryRecord> summaries;
    };
    static Loaded load(const std::filesystem::path& dir);
};

/// Manifest-shaped stats computed straight from a database's records, used
/// both to build manifests and to cross-check them.
std::map<ChunkLevel, ManifestLevel> compute_level_stats(const ChunkDatabase& db);

}  // namespace malrag
