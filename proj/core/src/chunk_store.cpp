#include "malrag/chunk_store.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "malrag/errors.hpp"
#include "malrag/vector_store.hpp"

namespace malrag {

namespace {

using nlohmann::json;

json range_to_json(const IndexRange& range) { return json::array({range.first, range.second}); }

IndexRange range_from_json(const json& value) {
    return {value.at(0).get<std::size_t>(), value.at(1).get<std::size_t>()};
}

json chunk_to_json(const Chunk& chunk) {
    json provenance = {{"doc_id", chunk.provenance.doc_id}};
    if (chunk.provenance.section_index)
        provenance["section_index"] = *chunk.provenance.section_index;
    if (chunk.provenance.paragraph_range)
        provenance["paragraph_range"] = range_to_json(*chunk.provenance.paragraph_range);
    if (chunk.provenance.sentence_range)
        provenance["sentence_range"] = range_to_json(*chunk.provenance.sentence_range);
    return {
        {"chunk_id", chunk.chunk_id},   {"level", level_name(chunk.level)},
        {"text", chunk.text},           {"words", chunk.words},
        {"is_summary", chunk.is_summary}, {"provenance", provenance},
    };
}

Chunk chunk_from_json(const json& record, long line_number) {
    Chunk chunk;
    try {
        chunk.chunk_id = record.at("chunk_id").get<std::string>();
        auto level = level_from_name(record.at("level").get<std::string>());
        if (!level) throw ParseError("unknown chunk level", line_number);
        chunk.level = *level;
        chunk.text = record.at("text").get<std::string>();
        chunk.words = record.at("words").get<std::size_t>();
        chunk.is_summary = record.at("is_summary").get<bool>();
        const json& provenance = record.at("provenance");
        chunk.provenance.doc_id = provenance.at("doc_id").get<std::string>();
        if (provenance.contains("section_index"))
            chunk.provenance.section_index = provenance.at("section_index").get<std::size_t>();
        if (provenance.contains("paragraph_range"))
            chunk.provenance.paragraph_range = range_from_json(provenance.at("paragraph_range"));
        if (provenance.contains("sentence_range"))
            chunk.provenance.sentence_range = range_from_json(provenance.at("sentence_range"));
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad chunk record: ") + e.what(), line_number);
    }
    return chunk;
}

std::vector<json> read_jsonl(const std::filesystem::path& file, const char* what) {
    std::ifstream in(file);
    if (!in) throw ParseError("cannot open " + file.string() + " (" + what + ")");
    std::vector<json> records;
    std::string line;
    long line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded()) throw ParseError("invalid JSON", line_number);
        records.push_back(std::move(record));
    }
    return records;
}

/// Writes through a temp file and renames, so the target exists only complete.
class AtomicFile {
public:
    explicit AtomicFile(const std::filesystem::path& target)
        : target_(target), temp_(target.string() + ".tmp"), out_(temp_, std::ios::binary | std::ios::trunc) {
        if (!out_) throw Error(Stage::Parse, "cannot open " + temp_.string() + " for writing");
    }

    std::ostream& stream() { return out_; }

    void commit() {
        out_.flush();
        if (!out_) throw Error(Stage::Parse, "write to " + temp_.string() + " failed");
        out_.close();
        std::filesystem::rename(temp_, target_);
    }

    ~AtomicFile() {
        if (out_.is_open()) {
            out_.close();
            std::error_code ec;
            std::filesystem::remove(temp_, ec);
        }
    }

private:
    std::filesystem::path target_;
    std::filesystem::path temp_;
    std::ofstream out_;
};

ManifestLevel manifest_level_from_json(const json& value) {
    ManifestLevel level;
    level.count = value.at("count").get<std::size_t>();
    level.avg_words = value.at("avg_words").get<std::size_t>();
    level.total_words = value.at("total_words").get<std::size_t>();
    return level;
}

json manifest_level_to_json(const ManifestLevel& level) {
    return {{"count", level.count}, {"avg_words", level.avg_words},
            {"total_words", level.total_words}};
}

}  // namespace

bool ChunkStore::is_finalized(const std::filesystem::path& dir) {
    return std::filesystem::exists(dir / kManifestFile);
}

void ChunkStore::write_chunks(const std::vector<Chunk>& chunks,
                              const std::filesystem::path& file) {
    AtomicFile out(file);
    for (const auto& chunk : chunks) out.stream() << chunk_to_json(chunk).dump() << '\n';
    out.commit();
}

std::vector<Chunk> ChunkStore::read_chunks(const std::filesystem::path& file) {
    std::vector<Chunk> chunks;
    long line_number = 0;
    for (const auto& record : read_jsonl(file, "chunks")) {
        ++line_number;
        chunks.push_back(chunk_from_json(record, line_number));
    }
    return chunks;
}

void ChunkStore::write_summary_records(const std::vector<SummaryRecord>& records,
                                       const std::filesystem::path& file) {
    AtomicFile out(file);
    for (const auto& record : records) {
        json value = {
            {"chunk_id", record.chunk_id},
            {"backend_id", record.backend_id},
            {"input_chunk_ids", record.input_chunk_ids},
            {"prompt_kind", task_kind_name(record.prompt_kind)},
        };
        out.stream() << value.dump() << '\n';
    }
    out.commit();
}

std::vector<SummaryRecord> ChunkStore::read_summary_records(const std::filesystem::path& file) {
    std::vector<SummaryRecord> records;
    long line_number = 0;
    for (const auto& value : read_jsonl(file, "summaries")) {
        ++line_number;
        SummaryRecord record;
        try {
            record.chunk_id = value.at("chunk_id").get<std::string>();
            record.backend_id = value.at("backend_id").get<std::string>();
            record.input_chunk_ids = value.at("input_chunk_ids").get<std::vector<std::string>>();
            std::string kind = value.at("prompt_kind").get<std::string>();
            if (kind == task_kind_name(TaskKind::ParagraphSummary))
                record.prompt_kind = TaskKind::ParagraphSummary;
            else if (kind == task_kind_name(TaskKind::SectionAggregate))
                record.prompt_kind = TaskKind::SectionAggregate;
            else if (kind == task_kind_name(TaskKind::DocumentAggregate))
                record.prompt_kind = TaskKind::DocumentAggregate;
            else
                throw ParseError("unknown prompt kind " + kind, line_number);
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad summary record: ") + e.what(), line_number);
        }
        records.push_back(std::move(record));
    }
    return records;
}

void ChunkStore::write_manifest(const StoreManifest& manifest, const std::filesystem::path& dir) {
    json levels = json::object();
    for (const auto& [level, stats] : manifest.levels)
        levels[std::string(level_name(level))] = manifest_level_to_json(stats);
    json value = {
        {"version", manifest.version},
        {"corpus_hash", manifest.corpus_hash},
        {"config_hash", manifest.config_hash},
        {"embedder_id", manifest.embedder_id},
        {"embedder_dimension", manifest.embedder_dimension},
        {"extractor_id", manifest.extractor_id},
        {"levels", levels},
        {"vanilla", manifest_level_to_json(manifest.vanilla)},
        {"document_count", manifest.document_count},
    };
    AtomicFile out(dir / kManifestFile);
    out.stream() << value.dump(2) << '\n';
    out.commit();
}

StoreManifest ChunkStore::read_manifest(const std::filesystem::path& dir) {
    std::ifstream in(dir / kManifestFile);
    if (!in) throw Error(Stage::Parse, "no manifest in " + dir.string());
    json value = json::parse(in, nullptr, false);
    if (value.is_discarded())
        throw Error(Stage::Parse, "manifest in " + dir.string() + " is not valid JSON");
    StoreManifest manifest;
    try {
        manifest.version = value.at("version").get<std::uint32_t>();
        manifest.corpus_hash = value.at("corpus_hash").get<std::string>();
        manifest.config_hash = value.at("config_hash").get<std::string>();
        manifest.embedder_id = value.at("embedder_id").get<std::string>();
        manifest.embedder_dimension = value.at("embedder_dimension").get<std::size_t>();
        manifest.extractor_id = value.at("extractor_id").get<std::string>();
        for (const auto& [name, stats] : value.at("levels").items()) {
            auto level = level_from_name(name);
            if (!level) throw Error(Stage::Parse, "manifest has unknown level " + name);
            manifest.levels[*level] = manifest_level_from_json(stats);
        }
        manifest.vanilla = manifest_level_from_json(value.at("vanilla"));
        manifest.document_count = value.at("document_count").get<std::size_t>();
    } catch (const json::exception& e) {
        throw Error(Stage::Parse, std::string("bad manifest: ") + e.what());
    }
    return manifest;
}

ChunkStore::Loaded ChunkStore::load(const std::filesystem::path& dir) {
    if (!is_finalized(dir))
        throw Error(Stage::Retrieve, dir.string() + " is not a finalized chunk store");
    Loaded loaded;
    loaded.manifest = read_manifest(dir);
    loaded.mal.add_chunks(read_chunks(dir / kChunksFile));

    auto vectors = read_vector_store((dir / kVectorsFile).string());
    loaded.mal.set_embedder_info(vectors.backend_id, vectors.dimension);
    if (vectors.backend_id != loaded.manifest.embedder_id)
        throw Error(Stage::Embed, "vector store embedder " + vectors.backend_id +
                                      " does not match manifest " + loaded.manifest.embedder_id);
    for (auto& record : vectors.records)
        loaded.mal.set_vector(record.chunk_id, std::move(record.vector));
    loaded.mal.finalize();

    if (std::filesystem::exists(dir / kVanillaChunksFile)) {
        loaded.vanilla.add_chunks(read_chunks(dir / kVanillaChunksFile));
        auto vanilla_vectors = read_vector_store((dir / kVanillaVectorsFile).string());
        loaded.vanilla.set_embedder_info(vanilla_vectors.backend_id, vanilla_vectors.dimension);
        for (auto& record : vanilla_vectors.records)
            loaded.vanilla.set_vector(record.chunk_id, std::move(record.vector));
        loaded.vanilla.finalize();
    }

    if (std::filesystem::exists(dir / kSummariesFile))
        loaded.summaries = read_summary_records(dir / kSummariesFile);
    return loaded;
}

std::map<ChunkLevel, ManifestLevel> compute_level_stats(const ChunkDatabase& db) {
    std::map<ChunkLevel, ManifestLevel> levels;
    for (auto level : {ChunkLevel::MultiSentence, ChunkLevel::Paragraph, ChunkLevel::Section,
                       ChunkLevel::Document}) {
        auto stats = db.level_stats(level);
        levels[level] = {stats.count, stats.avg_words(), stats.total_words};
    }
    return levels;
}

}  // namespace malrag
