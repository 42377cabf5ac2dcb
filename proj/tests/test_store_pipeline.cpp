#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "malrag/errors.hpp"
#include "malrag/pipeline.hpp"
#include "support/test_corpora.hpp"

using namespace malrag;
using malrag::testing::TempDir;
using malrag::testing::toy_corpus;
using malrag::testing::toy_sentence;
using malrag::testing::write_corpus_to;

namespace {

/// Toy corpus indexed with a 24-word multi-sentence target: paragraphs of
/// four 12-word sentences split into two multi chunks each.
PipelineConfig toy_config(const TempDir& dir) {
    PipelineConfig config;
    config.corpus_path = dir.file("corpus.jsonl").string();
    config.store_dir = dir.file("store").string();
    config.segmenter.multi_sentence_target_words = 24;
    config.embed_batch_size = 8;
    return config;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_SUITE("chunk store files") {

TEST_CASE("chunk jsonl round trip") {
    TempDir dir("chunks");
    std::vector<Chunk> chunks;
    Chunk m;
    m.chunk_id = "d1/s0/p1/m0-1";
    m.level = ChunkLevel::MultiSentence;
    m.text = "Some text here.";
    m.words = 3;
    m.provenance = {"d1", 0, IndexRange{1, 1}, IndexRange{0, 1}};
    chunks.push_back(m);
    Chunk s;
    s.chunk_id = "d1/s0";
    s.level = ChunkLevel::Section;
    s.text = "Summary text.";
    s.words = 2;
    s.provenance.doc_id = "d1";
    s.provenance.section_index = 0;
    s.is_summary = true;
    chunks.push_back(s);
    Chunk d;
    d.chunk_id = "d1/d";
    d.level = ChunkLevel::Document;
    d.text = "Document summary.";
    d.words = 2;
    d.provenance.doc_id = "d1";
    d.is_summary = true;
    chunks.push_back(d);

    auto file = dir.file("chunks.jsonl");
    ChunkStore::write_chunks(chunks, file);
    auto back = ChunkStore::read_chunks(file);
    REQUIRE(back.size() == 3);
    CHECK(back[0] == chunks[0]);
    CHECK(back[1] == chunks[1]);
    CHECK(back[2] == chunks[2]);
}

TEST_CASE("summary record round trip") {
    TempDir dir("summaries");
    std::vector<SummaryRecord> records = {
        {"d1/s0", "mock-extractive", {"d1/s0/p0", "d1/s0/p1"}, TaskKind::SectionAggregate},
        {"d1/d", "mock-extractive", {"d1/s0"}, TaskKind::DocumentAggregate},
    };
    auto file = dir.file("summaries.jsonl");
    ChunkStore::write_summary_records(records, file);
    auto back = ChunkStore::read_summary_records(file);
    REQUIRE(back.size() == 2);
    CHECK(back[0].chunk_id == "d1/s0");
    CHECK(back[0].input_chunk_ids == records[0].input_chunk_ids);
    CHECK(back[0].prompt_kind == TaskKind::SectionAggregate);
    CHECK(back[1].prompt_kind == TaskKind::DocumentAggregate);
}

TEST_CASE("manifest round trip and finalized marker") {
    TempDir dir("manifest");
    CHECK_FALSE(ChunkStore::is_finalized(dir.path()));

    StoreManifest manifest;
    manifest.corpus_hash = "deadbeef";
    manifest.config_hash = "cafe";
    manifest.embedder_id = "hashed-bag-256";
    manifest.embedder_dimension = 256;
    manifest.extractor_id = "mock-extractive";
    manifest.levels[ChunkLevel::Paragraph] = {12, 48, 576};
    manifest.vanilla = {24, 24, 576};
    manifest.document_count = 3;
    ChunkStore::write_manifest(manifest, dir.path());
    CHECK(ChunkStore::is_finalized(dir.path()));

    auto back = ChunkStore::read_manifest(dir.path());
    CHECK(back.corpus_hash == "deadbeef");
    CHECK(back.embedder_id == "hashed-bag-256");
    CHECK(back.levels.at(ChunkLevel::Paragraph).count == 12);
    CHECK(back.levels.at(ChunkLevel::Paragraph).total_words == 576);
    CHECK(back.vanilla.avg_words == 24);
    CHECK(back.document_count == 3);
}

}  // TEST_SUITE

TEST_SUITE("cmd_index") {

TEST_CASE("builds a finalized store with hand-checked counts") {
    TempDir dir("index");
    write_corpus_to(toy_corpus(), dir.file("corpus.jsonl"));
    auto config = toy_config(dir);

    auto manifest = cmd_index(config);
    CHECK(ChunkStore::is_finalized(config.store_dir));
    CHECK(manifest.document_count == 3);
    CHECK(manifest.embedder_id == "hashed-bag-256");
    CHECK(manifest.extractor_id == "mock-extractive");

    // 3 docs x 2 sections x 2 paragraphs x 4 sentences of 11 words.
    // Multi chunks pair two sentences (22 <= 24 < 33); section summaries join
    // two 11-word first sentences; document summaries join both (44 <= 60).
    CHECK(manifest.levels.at(ChunkLevel::Document).count == 3);
    CHECK(manifest.levels.at(ChunkLevel::Document).avg_words == 44);
    CHECK(manifest.levels.at(ChunkLevel::Section).count == 6);
    CHECK(manifest.levels.at(ChunkLevel::Section).avg_words == 22);
    CHECK(manifest.levels.at(ChunkLevel::Paragraph).count == 12);
    CHECK(manifest.levels.at(ChunkLevel::Paragraph).avg_words == 44);
    CHECK(manifest.levels.at(ChunkLevel::Paragraph).total_words == 528);
    CHECK(manifest.levels.at(ChunkLevel::MultiSentence).count == 24);
    CHECK(manifest.levels.at(ChunkLevel::MultiSentence).avg_words == 22);
    CHECK(manifest.vanilla.count == 24);
    CHECK(manifest.vanilla.avg_words == 22);

    auto loaded = ChunkStore::load(config.store_dir);
    CHECK(loaded.mal.size() == 3 + 6 + 12 + 24);
    CHECK(loaded.vanilla.size() == 24);
    CHECK(loaded.mal.finalized());
    CHECK(loaded.summaries.size() == 9);  // 6 sections + 3 documents

    const Chunk* summary = loaded.mal.find("toy-0/s0");
    REQUIRE(summary);
    CHECK(summary->text == toy_sentence(0, 0, 0, 0) + " " + toy_sentence(0, 0, 1, 0));
}

TEST_CASE("indexing is deterministic across directories") {
    TempDir dir_a("det_a");
    TempDir dir_b("det_b");
    write_corpus_to(toy_corpus(), dir_a.file("corpus.jsonl"));
    write_corpus_to(toy_corpus(), dir_b.file("corpus.jsonl"));
    auto config_a = toy_config(dir_a);
    auto config_b = toy_config(dir_b);
    cmd_index(config_a);
    cmd_index(config_b);

    for (const char* name :
         {ChunkStore::kChunksFile, ChunkStore::kSummariesFile, ChunkStore::kVectorsFile,
          ChunkStore::kVanillaChunksFile, ChunkStore::kVanillaVectorsFile,
          ChunkStore::kManifestFile}) {
        CAPTURE(name);
        CHECK(slurp(std::filesystem::path(config_a.store_dir) / name) ==
              slurp(std::filesystem::path(config_b.store_dir) / name));
    }
}

TEST_CASE("re-running a finalized store is a byte-level no-op") {
    TempDir dir("noop");
    write_corpus_to(toy_corpus(), dir.file("corpus.jsonl"));
    auto config = toy_config(dir);
    cmd_index(config);
    auto before = slurp(std::filesystem::path(config.store_dir) / ChunkStore::kManifestFile);
    auto chunks_before = slurp(std::filesystem::path(config.store_dir) / ChunkStore::kChunksFile);

    auto manifest = cmd_index(config);
    CHECK(manifest.document_count == 3);
    CHECK(slurp(std::filesystem::path(config.store_dir) / ChunkStore::kManifestFile) == before);
    CHECK(slurp(std::filesystem::path(config.store_dir) / ChunkStore::kChunksFile) ==
          chunks_before);
}

TEST_CASE("an interrupted build resumes to identical bytes") {
    TempDir full_dir("resume_full");
    write_corpus_to(toy_corpus(), full_dir.file("corpus.jsonl"));
    auto full_config = toy_config(full_dir);
    cmd_index(full_config);

    TempDir crash_dir("resume_crash");
    write_corpus_to(toy_corpus(), crash_dir.file("corpus.jsonl"));
    auto crash_config = toy_config(crash_dir);
    cmd_index(crash_config);
    // simulate a crash after chunk writing but before vectors and manifest
    std::filesystem::remove(std::filesystem::path(crash_config.store_dir) /
                            ChunkStore::kVectorsFile);
    std::filesystem::remove(std::filesystem::path(crash_config.store_dir) /
                            ChunkStore::kVanillaVectorsFile);
    std::filesystem::remove(std::filesystem::path(crash_config.store_dir) /
                            ChunkStore::kManifestFile);
    CHECK_FALSE(ChunkStore::is_finalized(crash_config.store_dir));
    cmd_index(crash_config);

    for (const char* name :
         {ChunkStore::kChunksFile, ChunkStore::kSummariesFile, ChunkStore::kVectorsFile,
          ChunkStore::kVanillaChunksFile, ChunkStore::kVanillaVectorsFile,
          ChunkStore::kManifestFile}) {
        CAPTURE(name);
        CHECK(slurp(std::filesystem::path(full_config.store_dir) / name) ==
              slurp(std::filesystem::path(crash_config.store_dir) / name));
    }
}

TEST_CASE("a finalized store built from different inputs is refused") {
    TempDir dir("conflict");
    write_corpus_to(toy_corpus(), dir.file("corpus.jsonl"));
    auto config = toy_config(dir);
    cmd_index(config);

    auto altered = toy_corpus();
    altered[0].sections[0].paragraphs[0].text = "Entirely different text now.";
    write_corpus_to(altered, dir.file("corpus.jsonl"));
    CHECK_THROWS_WITH_AS(cmd_index(config), doctest::Contains("different"), Error);
}

TEST_CASE("loading an unfinalized store fails") {
    TempDir dir("unfinalized");
    std::filesystem::create_directories(dir.file("store"));
    CHECK_THROWS_AS(ChunkStore::load(dir.file("store")), Error);
}

}  // TEST_SUITE

TEST_SUITE("cmd_query") {

TEST_CASE("echo chat returns the question with retrieved context") {
    TempDir dir("query");
    write_corpus_to(toy_corpus(), dir.file("corpus.jsonl"));
    auto config = toy_config(dir);
    cmd_index(config);

    std::string question = toy_sentence(1, 0, 1, 2);
    auto output = cmd_query(config, question);
    CHECK(output.answer.answer == question);
    CHECK(output.answer.backend_id == "echo");
    REQUIRE(!output.retrieval.selected.empty());
    // the verbatim sentence lives in multi chunk m2-3 of toy-1/s0/p1
    CHECK(output.retrieval.selected[0].chunk_id == "toy-1/s0/p1/m2-3");
    CHECK(output.answer.prompt_bytes > 0);
    REQUIRE(output.answer.context_text.has_value());
    CHECK(output.answer.context_text->find(question) != std::string::npos);
}

TEST_CASE("scripted chat answers only when its chunk was retrieved") {
    TempDir dir("scripted");
    write_corpus_to(toy_corpus(), dir.file("corpus.jsonl"));
    auto config = toy_config(dir);
    cmd_index(config);

    std::string transcript = dir.file("transcript.jsonl").string();
    {
        std::ofstream out(transcript);
        nlohmann::json ok = {{"question", "Which receptor does compound c1012 bind?"},
                             {"answer", "Compound c1012 binds receptor r1012."},
                             {"requires", "receptor r1012"}};
        out << ok.dump() << "\n";
    }
    config.chat.kind = "scripted";
    config.chat.transcript_path = transcript;

    auto output = cmd_query(config, "Which receptor does compound c1012 bind?");
    CHECK(output.answer.answer == "Compound c1012 binds receptor r1012.");

    // vanilla-only retrieval over a different population still answers because
    // the sentence text also lives in a vanilla chunk
    config.retrieve_vanilla = true;
    auto vanilla_output = cmd_query(config, "Which receptor does compound c1012 bind?");
    REQUIRE(!vanilla_output.retrieval.selected.empty());
    CHECK(vanilla_output.retrieval.selected[0].chunk_id.find("/v") != std::string::npos);
}

TEST_CASE("querying an unindexed store fails with the retrieve stage") {
    TempDir dir("nostore");
    write_corpus_to(toy_corpus(), dir.file("corpus.jsonl"));
    auto config = toy_config(dir);
    try {
        cmd_query(config, "anything");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.stage() == Stage::Retrieve);
        CHECK(e.exit_code() == 5);
    }
}

}  // TEST_SUITE

TEST_SUITE("level selection and presets") {

TEST_CASE("selection names") {
    auto all = parse_level_selection("all");
    CHECK_FALSE(all.vanilla);
    CHECK(all.levels.size() == 4);
    CHECK(parse_level_selection("document").levels == std::set<ChunkLevel>{ChunkLevel::Document});
    CHECK(parse_level_selection("section").levels == std::set<ChunkLevel>{ChunkLevel::Section});
    CHECK(parse_level_selection("paragraph").levels ==
          std::set<ChunkLevel>{ChunkLevel::Paragraph});
    CHECK(parse_level_selection("multi").levels ==
          std::set<ChunkLevel>{ChunkLevel::MultiSentence});
    CHECK(parse_level_selection("vanilla").vanilla);
    CHECK_THROWS_AS(parse_level_selection("bogus"), Error);
}

TEST_CASE("preset names") {
    auto preset = parse_preset("mal-tau05");
    CHECK_FALSE(preset.selection.vanilla);
    CHECK(preset.selection.levels.size() == 4);
    REQUIRE(preset.tau.has_value());
    CHECK(*preset.tau == doctest::Approx(0.5));

    auto no_tau = parse_preset("paragraph-notau");
    CHECK(no_tau.selection.levels == std::set<ChunkLevel>{ChunkLevel::Paragraph});
    CHECK_FALSE(no_tau.tau.has_value());

    auto vanilla = parse_preset("vanilla-tau05");
    CHECK(vanilla.selection.vanilla);

    CHECK_THROWS_AS(parse_preset("mal"), Error);
    CHECK_THROWS_AS(parse_preset("mal-tau9"), Error);
}

}  // TEST_SUITE

TEST_SUITE("cmd_eval") {

TEST_CASE("scripted run with hand-checked aggregates") {
    TempDir dir("eval");
    write_corpus_to(toy_corpus(), dir.file("corpus.jsonl"));
    auto config = toy_config(dir);
    cmd_index(config);

    // q1 answerable via its multi chunk; q2's canned answer is half right;
    // q3 has no transcript entry and scores zero.
    std::string q1 = "Which receptor does compound c0000 bind?";
    std::string q2 = "Which receptor does compound c1101 bind?";
    std::string q3 = "Which receptor does compound c2110 bind?";
    {
        std::ofstream out(dir.file("transcript.jsonl"));
        out << nlohmann::json{{"question", q1},
                              {"answer", "Compound c0000 binds receptor r0000."},
                              {"requires", "receptor r0000"}}
                   .dump()
            << "\n";
        out << nlohmann::json{{"question", q2},
                              {"answer", "Compound c1101 binds receptor r1101. Wrong extra claim."},
                              {"requires", "receptor r1101"}}
                   .dump()
            << "\n";
    }
    {
        std::ofstream out(dir.file("qa.jsonl"));
        out << nlohmann::json{{"question_id", "q1"},
                              {"question", q1},
                              {"ground_truth", "Compound c0000 binds receptor r0000."}}
                   .dump()
            << "\n";
        out << nlohmann::json{{"question_id", "q2"},
                              {"question", q2},
                              {"ground_truth", "Compound c1101 binds receptor r1101."}}
                   .dump()
            << "\n";
        out << nlohmann::json{{"question_id", "q3"},
                              {"question", q3},
                              {"ground_truth", "Compound c2110 binds receptor r2110."}}
                   .dump()
            << "\n";
    }
    config.chat.kind = "scripted";
    config.chat.transcript_path = dir.file("transcript.jsonl").string();

    EvalOptions options;
    options.qa_path = dir.file("qa.jsonl").string();
    options.report_path = dir.file("report.jsonl").string();
    options.audit_path = dir.file("audit.jsonl").string();

    auto report = cmd_eval(config, options);
    REQUIRE(report.questions.size() == 3);
    CHECK(report.questions[0].f1 == doctest::Approx(1.0));
    // q2: tp=1 fp=1 fn=0 -> f1 = 1/(1+0.5) = 2/3
    CHECK(report.questions[1].f1 == doctest::Approx(2.0 / 3.0));
    // q3: miss answer shares no statement with ground truth
    CHECK(report.questions[2].tp == 0);
    CHECK(report.mean_f1 == doctest::Approx((1.0 + 2.0 / 3.0 + 0.0) / 3.0));
    CHECK(report.evaluated_count == 3);

    // report file: summary line + 3 question lines
    std::ifstream report_in(options.report_path);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(report_in, line)) ++lines;
    CHECK(lines == 4);

    // audit file: one JSON record per question with the retrieval trace
    std::ifstream audit_in(options.audit_path);
    std::size_t audit_lines = 0;
    while (std::getline(audit_in, line)) {
        auto record = nlohmann::json::parse(line);
        CHECK(record.contains("question"));
        CHECK(record.contains("selected"));
        CHECK(record.at("budget_words") == 10000);
        ++audit_lines;
    }
    CHECK(audit_lines == 3);
}

TEST_CASE("gold context mode bypasses retrieval") {
    TempDir dir("gold");
    write_corpus_to(toy_corpus(), dir.file("corpus.jsonl"));
    auto config = toy_config(dir);
    cmd_index(config);

    std::string q = "Which receptor does compound c0000 bind?";
    {
        std::ofstream out(dir.file("qa.jsonl"));
        out << nlohmann::json{{"question_id", "g1"},
                              {"question", q},
                              {"ground_truth", "Compound c0000 binds receptor r0000."}}
                   .dump()
            << "\n";
    }
    {
        std::ofstream out(dir.file("transcript.jsonl"));
        out << nlohmann::json{{"question", q},
                              {"answer", "Compound c0000 binds receptor r0000."},
                              {"requires", "receptor r0000"}}
                   .dump()
            << "\n";
    }
    config.chat.kind = "scripted";
    config.chat.transcript_path = dir.file("transcript.jsonl").string();

    EvalOptions options;
    options.qa_path = dir.file("qa.jsonl").string();
    options.gold_context = true;

    auto report = cmd_eval(config, options);
    REQUIRE(report.questions.size() == 1);
    CHECK(report.questions[0].f1 == doctest::Approx(1.0));
    REQUIRE(report.questions[0].context_recall.has_value());
    CHECK(*report.questions[0].context_recall == doctest::Approx(1.0));
}

TEST_CASE("presets override levels and tau") {
    TempDir dir("preset");
    write_corpus_to(toy_corpus(), dir.file("corpus.jsonl"));
    auto config = toy_config(dir);
    cmd_index(config);

    std::string q = toy_sentence(0, 1, 1, 3);
    {
        std::ofstream out(dir.file("qa.jsonl"));
        out << nlohmann::json{{"question_id", "p1"},
                              {"question", q},
                              {"ground_truth", "Anything."}}
                   .dump()
            << "\n";
    }
    EvalOptions options;
    options.qa_path = dir.file("qa.jsonl").string();
    options.preset = "document-notau";
    options.audit_path = dir.file("audit.jsonl").string();

    cmd_eval(config, options);
    std::ifstream audit_in(options.audit_path);
    std::string line;
    REQUIRE(std::getline(audit_in, line));
    auto record = nlohmann::json::parse(line);
    CHECK(record.at("tau").is_null());
    for (const auto& item : record.at("selected"))
        CHECK(item.at("level") == "document");
}

}  // TEST_SUITE

TEST_SUITE("config and stats") {

TEST_CASE("config file overrides defaults") {
    TempDir dir("config");
    auto path = dir.file("config.json");
    {
        std::ofstream out(path);
        out << R"({
            "corpus_path": "corpus.jsonl",
            "store_dir": "some_store",
            "segmenter": {"multi_sentence_target_words": 99},
            "retriever": {"budget_words": 500, "tau": null, "packing": "stop"},
            "embedder": {"kind": "mock", "dimension": 32},
            "chat": {"kind": "scripted", "transcript_path": "t.jsonl"},
            "embed_batch_size": 7
        })";
    }
    auto config = load_pipeline_config(path.string());
    CHECK(config.corpus_path == "corpus.jsonl");
    CHECK(config.store_dir == "some_store");
    CHECK(config.segmenter.multi_sentence_target_words == 99);
    CHECK(config.retriever.budget_words == 500);
    CHECK_FALSE(config.retriever.tau.has_value());
    CHECK(config.retriever.packing == PackingRule::Stop);
    CHECK(config.embedder.dimension == 32);
    CHECK(config.chat.kind == "scripted");
    CHECK(config.chat.transcript_path == "t.jsonl");
    CHECK(config.embed_batch_size == 7);
    // untouched fields keep their defaults
    CHECK(config.extractor.kind == "mock");
    CHECK(config.parallelism == 1);
}

TEST_CASE("fingerprint tracks content-shaping settings only") {
    PipelineConfig a;
    PipelineConfig b;
    CHECK(config_fingerprint(a) == config_fingerprint(b));
    b.segmenter.multi_sentence_target_words = 123;
    CHECK(config_fingerprint(a) != config_fingerprint(b));

    PipelineConfig c;
    c.retriever.budget_words = 42;  // query-time setting, not part of the store
    CHECK(config_fingerprint(a) == config_fingerprint(c));
}

TEST_CASE("stats prints the per-level table") {
    TempDir dir("stats");
    write_corpus_to(toy_corpus(), dir.file("corpus.jsonl"));
    auto config = toy_config(dir);
    cmd_index(config);

    std::ostringstream out;
    cmd_stats(config, out);
    std::string text = out.str();
    CHECK(text.find("document") != std::string::npos);
    CHECK(text.find("section") != std::string::npos);
    CHECK(text.find("paragraph") != std::string::npos);
    CHECK(text.find("multi_sentence") != std::string::npos);
    CHECK(text.find("vanilla") != std::string::npos);
    CHECK(text.find("24") != std::string::npos);  // multi chunk count and avg words
}

}  // TEST_SUITE
