#include "malrag/cli.hpp"

#include <algorithm>
#include <ostream>

#include <CLI11.hpp>

#include "malrag/errors.hpp"
#include "malrag/pipeline.hpp"

namespace malrag {

namespace {

struct CommonFlags {
    std::string config_path;
    std::string corpus;
    std::string store;
    CLI::Option* config_opt = nullptr;
    CLI::Option* corpus_opt = nullptr;
    CLI::Option* store_opt = nullptr;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    flags.config_opt = cmd->add_option("--config", flags.config_path,
                                       "Pipeline config file (JSON)");
    flags.corpus_opt = cmd->add_option("--corpus", flags.corpus, "Corpus file (JSONL)");
    flags.store_opt = cmd->add_option("--store", flags.store, "Chunk store directory");
}

PipelineConfig build_config(const CommonFlags& flags) {
    PipelineConfig config;
    if (flags.config_opt->count()) config = load_pipeline_config(flags.config_path);
    if (flags.corpus_opt->count()) config.corpus_path = flags.corpus;
    if (flags.store_opt->count()) config.store_dir = flags.store;
    return config;
}

struct RetrievalFlags {
    std::string levels;
    std::string preset;
    std::string packing;
    double tau = 0.5;
    std::size_t budget = 0;
    CLI::Option* levels_opt = nullptr;
    CLI::Option* preset_opt = nullptr;
    CLI::Option* tau_opt = nullptr;
    CLI::Option* no_tau_opt = nullptr;
    CLI::Option* budget_opt = nullptr;
    CLI::Option* packing_opt = nullptr;
};

void add_retrieval_flags(CLI::App* cmd, RetrievalFlags& flags) {
    flags.levels_opt = cmd->add_option(
        "--levels", flags.levels,
        "Levels to retrieve over: all, document, section, paragraph, multi or vanilla");
    flags.preset_opt = cmd->add_option(
        "--preset", flags.preset, "Experiment preset, e.g. mal-tau05, paragraph-notau");
    flags.tau_opt =
        cmd->add_option("--tau", flags.tau, "Cumulative-probability threshold in (0, 1]");
    flags.no_tau_opt = cmd->add_flag("--no-tau", "Disable the probability threshold");
    flags.tau_opt->excludes(flags.no_tau_opt);
    flags.no_tau_opt->excludes(flags.tau_opt);
    flags.budget_opt = cmd->add_option("--budget", flags.budget, "Context budget in words");
    flags.packing_opt = cmd->add_option("--packing", flags.packing, "Packing rule: skip or stop")
                            ->check(CLI::IsMember({"skip", "stop"}));
}

/// Preset first, then the narrower flags, so an explicit --tau or --levels
/// wins over the preset it accompanies.
void apply_retrieval_flags(const RetrievalFlags& flags, PipelineConfig& config,
                           bool include_preset) {
    if (include_preset && flags.preset_opt->count()) {
        auto preset = parse_preset(flags.preset);
        config.retrieve_vanilla = preset.selection.vanilla;
        config.retriever.levels = preset.selection.levels;
        config.retriever.tau = preset.tau;
    }
    if (flags.levels_opt->count()) {
        auto selection = parse_level_selection(flags.levels);
        config.retrieve_vanilla = selection.vanilla;
        config.retriever.levels = selection.levels;
    }
    if (flags.tau_opt->count()) {
        if (flags.tau <= 0.0 || flags.tau > 1.0)
            throw Error(Stage::Retrieve, "tau must be in (0, 1]");
        config.retriever.tau = flags.tau;
    }
    if (flags.no_tau_opt->count()) config.retriever.tau.reset();
    if (flags.budget_opt->count()) config.retriever.budget_words = flags.budget;
    if (flags.packing_opt->count())
        config.retriever.packing =
            flags.packing == "stop" ? PackingRule::Stop : PackingRule::Skip;
}

void print_manifest(const StoreManifest& manifest, const std::string& store_dir,
                    std::ostream& out) {
    out << "indexed " << manifest.document_count << " documents into " << store_dir << '\n';
    for (auto level : {ChunkLevel::Document, ChunkLevel::Section, ChunkLevel::Paragraph,
                       ChunkLevel::MultiSentence}) {
        auto it = manifest.levels.find(level);
        if (it == manifest.levels.end()) continue;
        out << "  " << level_name(level) << ": " << it->second.count << " chunks, avg "
            << it->second.avg_words << " words\n";
    }
    if (manifest.vanilla.count)
        out << "  vanilla: " << manifest.vanilla.count << " chunks, avg "
            << manifest.vanilla.avg_words << " words\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-level retrieval-augmented answering pipeline"};
    app.name("malrag");
    app.require_subcommand(1);

    auto* index = app.add_subcommand("index", "Segment, summarize and embed a corpus");
    CommonFlags index_common;
    add_common_flags(index, index_common);

    auto* query = app.add_subcommand("query", "Answer one question against an indexed store");
    CommonFlags query_common;
    add_common_flags(query, query_common);
    RetrievalFlags query_retrieval;
    add_retrieval_flags(query, query_retrieval);
    std::string question;
    query->add_option("question", question, "The question to answer")->required();
    bool query_audit = false;
    query->add_flag("--audit", query_audit,
                    "Print the retrieval audit record before the answer");

    auto* eval = app.add_subcommand("eval", "Run a question set and score the answers");
    CommonFlags eval_common;
    add_common_flags(eval, eval_common);
    RetrievalFlags eval_retrieval;
    add_retrieval_flags(eval, eval_retrieval);
    std::string qa_path;
    eval->add_option("--qa", qa_path, "Question/answer dataset (JSONL)")->required();
    std::string report_path;
    eval->add_option("--report", report_path, "Write the per-question report here (JSONL)");
    std::string audit_path;
    eval->add_option("--audit", audit_path, "Write retrieval audit records here (JSONL)");
    bool gold_context = false;
    eval->add_flag("--gold-context", gold_context,
                   "Skip retrieval and supply the ground truth as context");

    auto* stats = app.add_subcommand("stats", "Per-level statistics of an indexed store");
    CommonFlags stats_common;
    add_common_flags(stats, stats_common);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (index->parsed()) {
            auto config = build_config(index_common);
            auto manifest = cmd_index(config);
            print_manifest(manifest, config.store_dir, out);
        } else if (query->parsed()) {
            auto config = build_config(query_common);
            apply_retrieval_flags(query_retrieval, config, true);
            auto output = cmd_query(config, question);
            if (query_audit) out << retrieval_audit_json(question, output.retrieval) << '\n';
            out << output.answer.answer << '\n';
        } else if (eval->parsed()) {
            auto config = build_config(eval_common);
            apply_retrieval_flags(eval_retrieval, config, false);
            EvalOptions options;
            options.qa_path = qa_path;
            options.report_path = report_path;
            options.audit_path = audit_path;
            options.gold_context = gold_context;
            if (eval_retrieval.preset_opt->count()) options.preset = eval_retrieval.preset;
            auto report = cmd_eval(config, options);
            out << "questions: " << report.questions.size()
                << "  evaluated: " << report.evaluated_count
                << "  excluded: " << report.excluded_count << '\n';
            out << "mean_f1: " << report.mean_f1 << '\n';
            if (report.mean_context_recall)
                out << "mean_context_recall: " << *report.mean_context_recall << '\n';
        } else if (stats->parsed()) {
            auto config = build_config(stats_common);
            cmd_stats(config, out);
        }
    } catch (const Error& e) {
        err << "error [" << stage_name(e.stage()) << "]: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    args.reserve(argc > 0 ? static_cast<std::size_t>(argc - 1) : 0);
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, out, err);
}

}  // namespace malrag
