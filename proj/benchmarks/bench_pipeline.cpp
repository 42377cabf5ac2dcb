#include <benchmark/benchmark.h>

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "malrag/chunk_database.hpp"
#include "malrag/embedder.hpp"
#include "malrag/retriever.hpp"
#include "malrag/segmenter.hpp"
#include "malrag/summarizer.hpp"

namespace {

using namespace malrag;

/// Synthetic prose with a stable seed: sentences of 8..20 words drawn from a
/// small vocabulary, so benchmark inputs are repeatable run to run.
std::string synthetic_paragraph(std::mt19937& rng, std::size_t sentences) {
    static const std::vector<std::string> vocabulary = {
        "protein", "binding", "assay",     "signal",   "kinase",  "pathway", "receptor",
        "ligand",  "sample",  "gradient",  "fraction", "buffer",  "elution", "substrate",
        "domain",  "residue", "structure", "affinity", "complex", "measured"};
    std::uniform_int_distribution<std::size_t> word_count(8, 20);
    std::uniform_int_distribution<std::size_t> pick(0, vocabulary.size() - 1);
    std::ostringstream out;
    for (std::size_t s = 0; s < sentences; ++s) {
        if (s) out << ' ';
        const std::size_t words = word_count(rng);
        for (std::size_t w = 0; w < words; ++w) {
            std::string word = vocabulary[pick(rng)];
            if (w == 0) word[0] = static_cast<char>(std::toupper(word[0]));
            out << word << (w + 1 == words ? "." : " ");
        }
    }
    return out.str();
}

Document synthetic_document(std::uint32_t seed, std::size_t sections, std::size_t paragraphs,
                            std::size_t sentences) {
    std::mt19937 rng(seed);
    Document document;
    document.doc_id = "bench-" + std::to_string(seed);
    document.title = "Benchmark document";
    for (std::size_t s = 0; s < sections; ++s) {
        Section section;
        section.section_index = s;
        section.heading = "Section " + std::to_string(s);
        for (std::size_t p = 0; p < paragraphs; ++p) {
            Paragraph paragraph;
            paragraph.paragraph_index = p;
            paragraph.text = synthetic_paragraph(rng, sentences);
            section.paragraphs.push_back(std::move(paragraph));
        }
        document.sections.push_back(std::move(section));
    }
    return document;
}

void bench_segment_document(benchmark::State& state) {
    auto document = synthetic_document(7, 8, 6, 12);
    SegmenterConfig config;
    for (auto _ : state) {
        auto chunks = segment_document(document, config);
        benchmark::DoNotOptimize(chunks);
    }
}
BENCHMARK(bench_segment_document);

void bench_fill_placeholders(benchmark::State& state) {
    auto document = synthetic_document(11, 8, 6, 12);
    SegmenterConfig config;
    MockExtractiveBackend backend;
    std::vector<Document> documents = {document};
    for (auto _ : state) {
        auto chunks = segment_document(document, config);
        auto result = fill_placeholders(documents, chunks, backend);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(bench_fill_placeholders);

void bench_embed_chunks(benchmark::State& state) {
    auto document = synthetic_document(13, 8, 6, 12);
    SegmenterConfig config;
    auto chunks = segment_multi_sentence(document, 0, document.sections[0].paragraphs[0], config);
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < 64; ++i)
        texts.push_back(chunks[i % chunks.size()].text);
    HashedBagEmbedder embedder(256);
    for (auto _ : state) {
        auto vectors = embedder.embed(texts);
        benchmark::DoNotOptimize(vectors);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 64);
}
BENCHMARK(bench_embed_chunks);

ChunkDatabase scored_database(std::size_t documents) {
    ChunkDatabase db;
    SegmenterConfig config;
    HashedBagEmbedder embedder(256);
    MockExtractiveBackend backend;
    std::vector<Document> corpus;
    for (std::size_t d = 0; d < documents; ++d)
        corpus.push_back(synthetic_document(static_cast<std::uint32_t>(100 + d), 4, 4, 10));
    std::vector<Chunk> chunks;
    for (const auto& document : corpus) {
        auto doc_chunks = segment_document(document, config);
        chunks.insert(chunks.end(), doc_chunks.begin(), doc_chunks.end());
    }
    fill_placeholders(corpus, chunks, backend);
    db.add_chunks(std::move(chunks));
    db.embed_all(embedder, 64);
    db.finalize();
    return db;
}

void bench_score_all(benchmark::State& state) {
    auto db = scored_database(static_cast<std::size_t>(state.range(0)));
    HashedBagEmbedder embedder(256);
    const std::set<ChunkLevel> levels = {ChunkLevel::Document, ChunkLevel::Section,
                                         ChunkLevel::Paragraph, ChunkLevel::MultiSentence};
    const std::string query = "receptor binding affinity measured in the kinase assay";
    auto query_vector = embedder.embed_one(query);
    for (auto _ : state) {
        auto scored = db.score_all(query_vector, levels);
        benchmark::DoNotOptimize(scored);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(db.size()));
}
BENCHMARK(bench_score_all)->Arg(8)->Arg(32);

void bench_retrieve(benchmark::State& state) {
    auto db = scored_database(16);
    HashedBagEmbedder embedder(256);
    RetrieverConfig config;
    config.budget_words = 2000;
    const std::string query = "substrate gradient fraction elution buffer";
    for (auto _ : state) {
        auto result = retrieve(query, db, embedder, config);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(bench_retrieve);

void bench_softmax(benchmark::State& state) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> sim(-1.0, 1.0);
    std::vector<ScoredChunk> scored(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < scored.size(); ++i)
        scored[i] = {"c" + std::to_string(i), sim(rng)};
    for (auto _ : state) {
        auto probabilities = softmax_probabilities(scored);
        benchmark::DoNotOptimize(probabilities);
    }
}
BENCHMARK(bench_softmax)->Arg(16)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
