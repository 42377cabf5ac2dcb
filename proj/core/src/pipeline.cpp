#include "malrag/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "malrag/errors.hpp"
#include "malrag/hash.hpp"
#include "malrag/vector_store.hpp"

namespace malrag {

namespace {

using nlohmann::json;

constexpr const char* kBuildStampFile = "build.json";

void check_keys(const json& object, std::initializer_list<const char*> known,
                const std::string& where) {
    for (const auto& item : object.items()) {
        bool found = false;
        for (const char* name : known)
            if (item.key() == name) found = true;
        if (!found) throw ParseError("unknown key \"" + item.key() + "\" in " + where);
    }
}

void http_from_json(const json& value, const std::string& where, HttpBackendConfig& config) {
    check_keys(value, {"base_url", "model", "token_env", "timeout_seconds", "retry"}, where);
    if (value.contains("base_url")) config.base_url = value.at("base_url").get<std::string>();
    if (value.contains("model")) config.model = value.at("model").get<std::string>();
    if (value.contains("token_env")) config.token_env = value.at("token_env").get<std::string>();
    if (value.contains("timeout_seconds"))
        config.timeout_seconds = value.at("timeout_seconds").get<int>();
    if (value.contains("retry")) {
        const json& retry = value.at("retry");
        check_keys(retry, {"attempts", "initial_delay_ms", "multiplier"}, where + ".retry");
        if (retry.contains("attempts")) config.retry.attempts = retry.at("attempts").get<int>();
        if (retry.contains("initial_delay_ms"))
            config.retry.initial_delay =
                std::chrono::milliseconds(retry.at("initial_delay_ms").get<long>());
        if (retry.contains("multiplier"))
            config.retry.multiplier = retry.at("multiplier").get<double>();
    }
}

std::optional<double> tau_from_json(const json& value) {
    if (value.is_null()) return std::nullopt;
    double tau = value.get<double>();
    if (tau <= 0.0 || tau > 1.0)
        throw ParseError("tau must be in (0, 1], got " + std::to_string(tau));
    return tau;
}

std::set<ChunkLevel> levels_from_json(const json& value) {
    if (!value.is_array()) throw ParseError("retriever.levels must be an array of level names");
    std::set<ChunkLevel> levels;
    for (const auto& item : value) {
        auto level = level_from_name(item.get<std::string>());
        if (!level) throw ParseError("unknown level name " + item.get<std::string>());
        levels.insert(*level);
    }
    if (levels.empty()) throw ParseError("retriever.levels must not be empty");
    return levels;
}

PackingRule packing_from_name(const std::string& name) {
    if (name == "skip") return PackingRule::Skip;
    if (name == "stop") return PackingRule::Stop;
    throw ParseError("unknown packing rule \"" + name + "\" (expected skip or stop)");
}

std::string hash_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return hex64(fnv1a64(buffer.str()));
}

void write_text_atomic(const std::string& text, const std::filesystem::path& target) {
    auto temp = target.string() + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Stage::Parse, "cannot open " + temp + " for writing");
        out << text;
        out.flush();
        if (!out) throw Error(Stage::Parse, "write to " + temp + " failed");
    }
    std::filesystem::rename(temp, target);
}

void write_vector_store_atomic(const VectorStoreData& data, const std::filesystem::path& target) {
    auto temp = target.string() + ".tmp";
    write_vector_store(data, temp);
    std::filesystem::rename(temp, target);
}

/// Unfinalized partial files are trusted only when the stamp written at the
/// start of their build matches the current inputs; anything else is wiped.
void reconcile_build_stamp(const std::filesystem::path& dir, const std::string& corpus_hash,
                           const std::string& config_hash) {
    const auto stamp = dir / kBuildStampFile;
    bool stamp_matches = false;
    if (std::filesystem::exists(stamp)) {
        std::ifstream in(stamp);
        json value = json::parse(in, nullptr, false);
        stamp_matches = value.is_object() && value.value("corpus_hash", "") == corpus_hash &&
                        value.value("config_hash", "") == config_hash;
    }
    if (!stamp_matches) {
        for (const char* name :
             {ChunkStore::kChunksFile, ChunkStore::kSummariesFile, ChunkStore::kVectorsFile,
              ChunkStore::kVanillaChunksFile, ChunkStore::kVanillaVectorsFile,
              ChunkStore::kManifestFile}) {
            std::error_code ec;
            std::filesystem::remove(dir / name, ec);
        }
        json value = {{"corpus_hash", corpus_hash}, {"config_hash", config_hash}};
        write_text_atomic(value.dump(2) + "\n", stamp);
    }
}

PromptTemplate load_prompt_template(const PipelineConfig& config) {
    PromptTemplate tmpl;
    if (!config.answer_template_path.empty())
        tmpl = PromptTemplate::load(config.answer_template_path);
    if (!config.icl_examples_path.empty()) {
        std::ifstream in(config.icl_examples_path);
        if (!in) throw ParseError("cannot open " + config.icl_examples_path);
        json value = json::parse(in, nullptr, false);
        if (value.is_discarded())
            throw ParseError(config.icl_examples_path + " is not valid JSON");
        const json* array = &value;
        if (value.is_object() && value.contains("examples")) array = &value.at("examples");
        if (!array->is_array())
            throw ParseError(config.icl_examples_path + " must hold an array of examples");
        for (const auto& item : *array)
            tmpl.examples.push_back(
                {item.at("question").get<std::string>(), item.at("answer").get<std::string>()});
    }
    return tmpl;
}

const std::set<ChunkLevel> kAllLevels = {ChunkLevel::Document, ChunkLevel::Section,
                                         ChunkLevel::Paragraph, ChunkLevel::MultiSentence};

struct RetrievalSetup {
    const ChunkDatabase* db = nullptr;
    RetrieverConfig retriever;
};

/// Picks the population to retrieve over. The vanilla population carries its
/// own level tags, so level filtering applies only to the four-level one.
RetrievalSetup retrieval_setup(const PipelineConfig& config, const ChunkStore::Loaded& loaded) {
    RetrievalSetup setup;
    setup.retriever = config.retriever;
    if (config.retrieve_vanilla) {
        if (loaded.vanilla.size() == 0)
            throw Error(Stage::Retrieve, "store has no vanilla population");
        setup.db = &loaded.vanilla;
        setup.retriever.levels = kAllLevels;
    } else {
        setup.db = &loaded.mal;
    }
    return setup;
}

void check_query_embedder(const EmbedderBackend& embedder, const StoreManifest& manifest) {
    if (embedder.backend_id() != manifest.embedder_id)
        throw Error(Stage::Embed, "query embedder " + embedder.backend_id() +
                                      " does not match store embedder " + manifest.embedder_id);
}

void recompute_aggregates(EvalReport& report) {
    double f1_sum = 0.0;
    double recall_sum = 0.0;
    std::size_t recall_count = 0;
    report.evaluated_count = 0;
    report.excluded_count = 0;
    for (const auto& q : report.questions) {
        if (!q.evaluated) {
            ++report.excluded_count;
            continue;
        }
        ++report.evaluated_count;
        f1_sum += q.f1;
        if (q.context_recall) {
            recall_sum += *q.context_recall;
            ++recall_count;
        }
    }
    report.mean_f1 = report.evaluated_count ? f1_sum / static_cast<double>(report.evaluated_count)
                                            : 0.0;
    if (recall_count)
        report.mean_context_recall = recall_sum / static_cast<double>(recall_count);
    else
        report.mean_context_recall.reset();
}

json retrieved_chunk_json(const RetrievedChunk& chunk) {
    return {
        {"chunk_id", chunk.chunk_id},
        {"level", std::string(level_name(chunk.level))},
        {"similarity", chunk.similarity},
        {"probability", chunk.probability},
        {"cumulative_probability", chunk.cumulative_probability},
        {"words", chunk.words},
    };
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file " + path);
    json value = json::parse(in, nullptr, false);
    if (value.is_discarded()) throw ParseError(path + " is not valid JSON");
    if (!value.is_object()) throw ParseError(path + " must hold a JSON object");

    check_keys(value,
               {"corpus_path", "store_dir", "extractor", "embedder", "chat", "judge", "segmenter",
                "abbreviations_path", "retriever", "retrieve_vanilla", "answer_template_path",
                "icl_examples_path", "embed_batch_size", "parallelism", "build_vanilla"},
               "config");

    PipelineConfig config;
    try {
        if (value.contains("corpus_path"))
            config.corpus_path = value.at("corpus_path").get<std::string>();
        if (value.contains("store_dir"))
            config.store_dir = value.at("store_dir").get<std::string>();
        if (value.contains("abbreviations_path"))
            config.abbreviations_path = value.at("abbreviations_path").get<std::string>();
        if (value.contains("retrieve_vanilla"))
            config.retrieve_vanilla = value.at("retrieve_vanilla").get<bool>();
        if (value.contains("answer_template_path"))
            config.answer_template_path = value.at("answer_template_path").get<std::string>();
        if (value.contains("icl_examples_path"))
            config.icl_examples_path = value.at("icl_examples_path").get<std::string>();
        if (value.contains("embed_batch_size"))
            config.embed_batch_size = value.at("embed_batch_size").get<std::size_t>();
        if (value.contains("parallelism"))
            config.parallelism = value.at("parallelism").get<std::size_t>();
        if (value.contains("build_vanilla"))
            config.build_vanilla = value.at("build_vanilla").get<bool>();

        if (value.contains("segmenter")) {
            const json& segmenter = value.at("segmenter");
            check_keys(segmenter, {"multi_sentence_target_words", "min_sentences_per_chunk"},
                       "segmenter");
            if (segmenter.contains("multi_sentence_target_words"))
                config.segmenter.multi_sentence_target_words =
                    segmenter.at("multi_sentence_target_words").get<std::size_t>();
            if (segmenter.contains("min_sentences_per_chunk"))
                config.segmenter.min_sentences_per_chunk =
                    segmenter.at("min_sentences_per_chunk").get<std::size_t>();
        }

        if (value.contains("retriever")) {
            const json& retriever = value.at("retriever");
            check_keys(retriever, {"budget_words", "tau", "levels", "packing"}, "retriever");
            if (retriever.contains("budget_words"))
                config.retriever.budget_words = retriever.at("budget_words").get<std::size_t>();
            if (retriever.contains("tau"))
                config.retriever.tau = tau_from_json(retriever.at("tau"));
            if (retriever.contains("levels"))
                config.retriever.levels = levels_from_json(retriever.at("levels"));
            if (retriever.contains("packing"))
                config.retriever.packing =
                    packing_from_name(retriever.at("packing").get<std::string>());
        }

        if (value.contains("extractor")) {
            const json& extractor = value.at("extractor");
            check_keys(extractor, {"kind", "http", "template_files"}, "extractor");
            if (extractor.contains("kind"))
                config.extractor.kind = extractor.at("kind").get<std::string>();
            if (extractor.contains("http"))
                http_from_json(extractor.at("http"), "extractor.http", config.extractor.http);
            if (extractor.contains("template_files"))
                for (const auto& item : extractor.at("template_files").items())
                    config.extractor.template_files[item.key()] = item.value().get<std::string>();
        }

        if (value.contains("embedder")) {
            const json& embedder = value.at("embedder");
            check_keys(embedder, {"kind", "dimension", "http"}, "embedder");
            if (embedder.contains("kind"))
                config.embedder.kind = embedder.at("kind").get<std::string>();
            if (embedder.contains("dimension"))
                config.embedder.dimension = embedder.at("dimension").get<std::size_t>();
            if (embedder.contains("http"))
                http_from_json(embedder.at("http"), "embedder.http", config.embedder.http);
        }

        if (value.contains("chat")) {
            const json& chat = value.at("chat");
            check_keys(chat, {"kind", "transcript_path", "http"}, "chat");
            if (chat.contains("kind")) config.chat.kind = chat.at("kind").get<std::string>();
            if (chat.contains("transcript_path"))
                config.chat.transcript_path = chat.at("transcript_path").get<std::string>();
            if (chat.contains("http")) http_from_json(chat.at("http"), "chat.http", config.chat.http);
        }

        if (value.contains("judge")) {
            const json& judge = value.at("judge");
            check_keys(judge, {"kind", "http"}, "judge");
            if (judge.contains("kind")) config.judge.kind = judge.at("kind").get<std::string>();
            if (judge.contains("http"))
                http_from_json(judge.at("http"), "judge.http", config.judge.http);
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad config value: ") + e.what());
    }
    return config;
}

std::string config_fingerprint(const PipelineConfig& config) {
    std::ostringstream out;
    out << "segmenter.target=" << config.segmenter.multi_sentence_target_words << ';'
        << "segmenter.min=" << config.segmenter.min_sentences_per_chunk << ';'
        << "abbreviations=" << config.abbreviations_path << ';'
        << "extractor.kind=" << config.extractor.kind << ';';
    if (config.extractor.kind == "http") out << "extractor.model=" << config.extractor.http.model << ';';
    for (const auto& [kind, file] : config.extractor.template_files)
        out << "extractor.template." << kind << '=' << file << ';';
    out << "embedder.kind=" << config.embedder.kind << ';'
        << "embedder.dimension=" << config.embedder.dimension << ';';
    if (config.embedder.kind == "http") out << "embedder.model=" << config.embedder.http.model << ';';
    out << "build_vanilla=" << (config.build_vanilla ? 1 : 0) << ';';
    return hex64(fnv1a64(out.str()));
}

std::unique_ptr<ExtractorBackend> make_extractor(const PipelineConfig& config) {
    if (config.extractor.kind == "mock") return std::make_unique<MockExtractiveBackend>();
    if (config.extractor.kind == "http") {
        auto backend = std::make_unique<HttpExtractorBackend>(config.extractor.http);
        for (const auto& [kind_name, file] : config.extractor.template_files) {
            TaskKind kind;
            if (kind_name == task_kind_name(TaskKind::ParagraphSummary))
                kind = TaskKind::ParagraphSummary;
            else if (kind_name == task_kind_name(TaskKind::SectionAggregate))
                kind = TaskKind::SectionAggregate;
            else if (kind_name == task_kind_name(TaskKind::DocumentAggregate))
                kind = TaskKind::DocumentAggregate;
            else
                throw ParseError("unknown extractor template kind \"" + kind_name + "\"");
            backend->load_template_file(kind, file);
        }
        return backend;
    }
    throw ParseError("unknown extractor kind \"" + config.extractor.kind + "\"");
}

std::unique_ptr<EmbedderBackend> make_embedder(const PipelineConfig& config) {
    if (config.embedder.kind == "mock")
        return std::make_unique<HashedBagEmbedder>(config.embedder.dimension);
    if (config.embedder.kind == "http")
        return std::make_unique<HttpEmbedderBackend>(config.embedder.http,
                                                     config.embedder.dimension);
    throw ParseError("unknown embedder kind \"" + config.embedder.kind + "\"");
}

std::unique_ptr<ChatBackend> make_chat_backend(const PipelineConfig& config) {
    if (config.chat.kind == "echo") return std::make_unique<EchoChatBackend>();
    if (config.chat.kind == "scripted") {
        if (config.chat.transcript_path.empty())
            throw ParseError("scripted chat requires a transcript_path");
        return std::make_unique<ScriptedChatBackend>(
            ScriptedChatBackend::load(config.chat.transcript_path));
    }
    if (config.chat.kind == "http") return std::make_unique<HttpChatBackend>(config.chat.http);
    throw ParseError("unknown chat kind \"" + config.chat.kind + "\"");
}

std::unique_ptr<StatementJudge> make_judge(const PipelineConfig& config) {
    if (config.judge.kind == "exact") return std::make_unique<ExactMatchJudge>();
    if (config.judge.kind == "http") return std::make_unique<HttpStatementJudge>(config.judge.http);
    throw ParseError("unknown judge kind \"" + config.judge.kind + "\"");
}

LevelSelection parse_level_selection(const std::string& name) {
    LevelSelection selection;
    if (name == "all") return selection;
    if (name == "vanilla") {
        selection.vanilla = true;
        return selection;
    }
    if (name == "document") {
        selection.levels = {ChunkLevel::Document};
        return selection;
    }
    if (name == "section") {
        selection.levels = {ChunkLevel::Section};
        return selection;
    }
    if (name == "paragraph") {
        selection.levels = {ChunkLevel::Paragraph};
        return selection;
    }
    if (name == "multi") {
        selection.levels = {ChunkLevel::MultiSentence};
        return selection;
    }
    throw Error(Stage::Retrieve, "unknown level selection \"" + name +
                                     "\" (expected all, document, section, paragraph, multi or "
                                     "vanilla)");
}

Preset parse_preset(const std::string& name) {
    auto dash = name.rfind('-');
    if (dash == std::string::npos)
        throw Error(Stage::Retrieve,
                    "invalid preset \"" + name + "\" (expected e.g. mal-tau05, paragraph-notau)");
    const std::string base = name.substr(0, dash);
    const std::string tau_part = name.substr(dash + 1);

    Preset preset;
    if (base == "mal")
        preset.selection = LevelSelection{};
    else if (base != "all")
        preset.selection = parse_level_selection(base);
    else
        throw Error(Stage::Retrieve, "invalid preset base \"all\" (the combined recipe is mal)");

    if (tau_part == "tau05")
        preset.tau = 0.5;
    else if (tau_part == "notau")
        preset.tau = std::nullopt;
    else
        throw Error(Stage::Retrieve,
                    "invalid preset threshold \"" + tau_part + "\" (expected tau05 or notau)");
    return preset;
}

StoreManifest cmd_index(const PipelineConfig& config) {
    if (config.corpus_path.empty()) throw ParseError("no corpus path configured");
    auto documents = parse_corpus_file(config.corpus_path);
    const std::string corpus_hash = hash_file_bytes(config.corpus_path);
    const std::string config_hash = config_fingerprint(config);
    const std::filesystem::path dir(config.store_dir);
    std::filesystem::create_directories(dir);

    if (ChunkStore::is_finalized(dir)) {
        auto manifest = ChunkStore::read_manifest(dir);
        if (manifest.corpus_hash != corpus_hash || manifest.config_hash != config_hash)
            throw Error(Stage::Parse,
                        dir.string() + " was finalized from different inputs; refusing to rebuild "
                                       "over it (use a fresh store directory)");
        return manifest;
    }
    reconcile_build_stamp(dir, corpus_hash, config_hash);

    SegmenterConfig segmenter = config.segmenter;
    if (!config.abbreviations_path.empty())
        segmenter.abbreviations = AbbreviationSet::load(config.abbreviations_path);

    auto extractor = make_extractor(config);
    auto embedder = make_embedder(config);

    const auto chunks_file = dir / ChunkStore::kChunksFile;
    const auto summaries_file = dir / ChunkStore::kSummariesFile;
    std::vector<Chunk> chunks;
    if (std::filesystem::exists(chunks_file) && std::filesystem::exists(summaries_file)) {
        chunks = ChunkStore::read_chunks(chunks_file);
    } else {
        for (const auto& document : documents) {
            auto doc_chunks = segment_document(document, segmenter);
            chunks.insert(chunks.end(), std::make_move_iterator(doc_chunks.begin()),
                          std::make_move_iterator(doc_chunks.end()));
        }
        auto fill = fill_placeholders(documents, chunks, *extractor, config.parallelism);
        if (!fill.failed_doc_ids.empty()) {
            std::string failed;
            for (const auto& doc_id : fill.failed_doc_ids) {
                if (!failed.empty()) failed += ", ";
                failed += doc_id;
            }
            throw Error(Stage::Summarize, "summarization failed for: " + failed);
        }
        ChunkStore::write_chunks(chunks, chunks_file);
        ChunkStore::write_summary_records(fill.records, summaries_file);
    }

    ChunkDatabase mal;
    mal.add_chunks(std::move(chunks));
    const auto vectors_file = dir / ChunkStore::kVectorsFile;
    if (!std::filesystem::exists(vectors_file)) {
        mal.embed_all(*embedder, config.embed_batch_size);
        VectorStoreData data;
        data.dimension = static_cast<std::uint32_t>(embedder->dimension());
        data.backend_id = embedder->backend_id();
        data.records = mal.embedded_chunks();
        write_vector_store_atomic(data, vectors_file);
    }

    ManifestLevel vanilla_stats;
    if (config.build_vanilla) {
        const auto vanilla_chunks_file = dir / ChunkStore::kVanillaChunksFile;
        std::vector<Chunk> vanilla_chunks;
        if (std::filesystem::exists(vanilla_chunks_file)) {
            vanilla_chunks = ChunkStore::read_chunks(vanilla_chunks_file);
        } else {
            for (const auto& document : documents) {
                auto doc_chunks = segment_vanilla(document, segmenter);
                vanilla_chunks.insert(vanilla_chunks.end(),
                                      std::make_move_iterator(doc_chunks.begin()),
                                      std::make_move_iterator(doc_chunks.end()));
            }
            ChunkStore::write_chunks(vanilla_chunks, vanilla_chunks_file);
        }
        ChunkDatabase vanilla;
        vanilla.add_chunks(std::move(vanilla_chunks));
        const auto vanilla_vectors_file = dir / ChunkStore::kVanillaVectorsFile;
        if (!std::filesystem::exists(vanilla_vectors_file)) {
            vanilla.embed_all(*embedder, config.embed_batch_size);
            VectorStoreData data;
            data.dimension = static_cast<std::uint32_t>(embedder->dimension());
            data.backend_id = embedder->backend_id();
            data.records = vanilla.embedded_chunks();
            write_vector_store_atomic(data, vanilla_vectors_file);
        }
        auto stats = vanilla.level_stats(ChunkLevel::MultiSentence);
        vanilla_stats = {stats.count, stats.avg_words(), stats.total_words};
    }

    StoreManifest manifest;
    manifest.corpus_hash = corpus_hash;
    manifest.config_hash = config_hash;
    manifest.embedder_id = embedder->backend_id();
    manifest.embedder_dimension = embedder->dimension();
    manifest.extractor_id = extractor->backend_id();
    manifest.levels = compute_level_stats(mal);
    manifest.vanilla = vanilla_stats;
    manifest.document_count = documents.size();
    ChunkStore::write_manifest(manifest, dir);
    return manifest;
}

QueryOutput cmd_query(const PipelineConfig& config, const std::string& question) {
    auto loaded = ChunkStore::load(config.store_dir);
    auto embedder = make_embedder(config);
    check_query_embedder(*embedder, loaded.manifest);
    auto setup = retrieval_setup(config, loaded);

    QueryOutput output;
    output.retrieval = retrieve(question, *setup.db, *embedder, setup.retriever);
    auto context = assemble_context(output.retrieval.selected, *setup.db);
    auto tmpl = load_prompt_template(config);
    auto chat = make_chat_backend(config);
    output.answer = generate_answer(question, context, tmpl, *chat, config.chat.http.retry);
    return output;
}

EvalReport cmd_eval(const PipelineConfig& config, const EvalOptions& options) {
    auto qa_pairs = load_qa_file(options.qa_path);

    PipelineConfig effective = config;
    if (options.preset) {
        auto preset = parse_preset(*options.preset);
        effective.retrieve_vanilla = preset.selection.vanilla;
        effective.retriever.levels = preset.selection.levels;
        effective.retriever.tau = preset.tau;
    }

    auto chat = make_chat_backend(effective);
    auto judge = make_judge(effective);
    auto tmpl = load_prompt_template(effective);

    std::optional<ChunkStore::Loaded> loaded;
    std::unique_ptr<EmbedderBackend> embedder;
    RetrievalSetup setup;
    if (!options.gold_context) {
        loaded.emplace(ChunkStore::load(effective.store_dir));
        embedder = make_embedder(effective);
        check_query_embedder(*embedder, loaded->manifest);
        setup = retrieval_setup(effective, *loaded);
    }

    std::ofstream audit;
    if (!options.audit_path.empty()) {
        audit.open(options.audit_path, std::ios::trunc);
        if (!audit) throw Error(Stage::Evaluate, "cannot open " + options.audit_path);
    }

    std::vector<AnswerRecord> answers;
    std::map<std::string, std::string> failures;
    for (const auto& pair : qa_pairs) {
        try {
            std::string context;
            if (options.gold_context) {
                context = pair.ground_truth;
            } else {
                auto retrieval = retrieve(pair.question, *setup.db, *embedder, setup.retriever);
                if (audit.is_open())
                    audit << retrieval_audit_json(pair.question, retrieval) << '\n';
                context = assemble_context(retrieval.selected, *setup.db);
            }
            auto record =
                generate_answer(pair.question, context, tmpl, *chat, effective.chat.http.retry);
            record.retrieval_ref = pair.question_id;
            answers.push_back(std::move(record));
        } catch (const Error& e) {
            failures[pair.question_id] = e.what();
        }
    }

    auto report = evaluate_run(qa_pairs, answers, *judge);
    if (!failures.empty()) {
        for (auto& question : report.questions) {
            auto it = failures.find(question.question_id);
            if (it == failures.end()) continue;
            question.evaluated = false;
            question.error = it->second;
            question.tp = question.fp = question.fn = 0;
            question.f1 = 0.0;
            question.context_recall.reset();
        }
        recompute_aggregates(report);
    }
    if (!options.report_path.empty()) write_report_file(report, options.report_path);
    return report;
}

void cmd_stats(const PipelineConfig& config, std::ostream& out) {
    auto loaded = ChunkStore::load(config.store_dir);
    auto recomputed = compute_level_stats(loaded.mal);
    for (const auto& [level, stats] : recomputed) {
        auto it = loaded.manifest.levels.find(level);
        if (it == loaded.manifest.levels.end() || it->second.count != stats.count ||
            it->second.avg_words != stats.avg_words || it->second.total_words != stats.total_words)
            throw Error(Stage::Parse, "manifest does not match store contents for level " +
                                          std::string(level_name(level)));
    }
    auto vanilla = loaded.vanilla.level_stats(ChunkLevel::MultiSentence);
    if (vanilla.count != loaded.manifest.vanilla.count ||
        vanilla.total_words != loaded.manifest.vanilla.total_words)
        throw Error(Stage::Parse, "manifest does not match the vanilla population");

    out << std::left << std::setw(16) << "level" << std::right << std::setw(8) << "count"
        << std::setw(11) << "avg_words" << std::setw(13) << "total_words" << '\n';
    for (auto level : {ChunkLevel::Document, ChunkLevel::Section, ChunkLevel::Paragraph,
                       ChunkLevel::MultiSentence}) {
        const auto& stats = loaded.manifest.levels.at(level);
        out << std::left << std::setw(16) << level_name(level) << std::right << std::setw(8)
            << stats.count << std::setw(11) << stats.avg_words << std::setw(13)
            << stats.total_words << '\n';
    }
    out << std::left << std::setw(16) << "vanilla" << std::right << std::setw(8)
        << loaded.manifest.vanilla.count << std::setw(11) << loaded.manifest.vanilla.avg_words
        << std::setw(13) << loaded.manifest.vanilla.total_words << '\n';
    out << "documents: " << loaded.manifest.document_count << '\n';
    out << "embedder: " << loaded.manifest.embedder_id << " (dimension "
        << loaded.manifest.embedder_dimension << ")\n";
    out << "extractor: " << loaded.manifest.extractor_id << '\n';
}

std::string retrieval_audit_json(const std::string& question, const RetrievalResult& result) {
    json selected = json::array();
    for (const auto& chunk : result.selected) selected.push_back(retrieved_chunk_json(chunk));
    json budget_stage = json::array();
    for (const auto& chunk : result.budget_stage)
        budget_stage.push_back(retrieved_chunk_json(chunk));
    json record = {
        {"question", question},
        {"budget_words", result.config.budget_words},
        {"tau", result.config.tau ? json(*result.config.tau) : json(nullptr)},
        {"packing", result.config.packing == PackingRule::Skip ? "skip" : "stop"},
        {"k_budget_selected", result.k_budget_selected},
        {"first_chunk_exceeded_tau", result.first_chunk_exceeded_tau},
        {"total_words", result.total_words},
        {"selected", std::move(selected)},
        {"budget_stage", std::move(budget_stage)},
    };
    return record.dump();
}

}  // namespace malrag
