#include "malrag/answer.hpp"

#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "malrag/chunk_database.hpp"
#include "malrag/errors.hpp"
#include "malrag/hash.hpp"

namespace malrag {

namespace {

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
    std::size_t count = 0;
    for (std::size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size()))
        ++count;
    return count;
}

std::string replace_once(std::string text, const std::string& needle, const std::string& value) {
    auto pos = text.find(needle);
    text.replace(pos, needle.size(), value);
    return text;
}

}  // namespace

PromptTemplate PromptTemplate::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Stage::Generate, "cannot open template file " + path);
    nlohmann::json spec = nlohmann::json::parse(in, nullptr, false);
    if (spec.is_discarded())
        throw Error(Stage::Generate, "template file " + path + " is not valid JSON");
    PromptTemplate tmpl;
    if (spec.contains("template")) tmpl.text = spec.at("template").get<std::string>();
    for (const auto& example : spec.value("examples", nlohmann::json::array()))
        tmpl.examples.push_back({example.at("question").get<std::string>(),
                                 example.at("answer").get<std::string>()});
    validate_template(tmpl);
    return tmpl;
}

void validate_template(const PromptTemplate& tmpl) {
    for (const char* placeholder : {"{context}", "{question}"}) {
        std::size_t n = count_occurrences(tmpl.text, placeholder);
        if (n == 0)
            throw Error(Stage::Generate,
                        std::string("template is missing the ") + placeholder + " placeholder");
        if (n > 1)
            throw Error(Stage::Generate, std::string("template repeats the ") + placeholder +
                                             " placeholder");
    }
}

std::string assemble_prompt(const PromptTemplate& tmpl, const std::string& context,
                            const std::string& question) {
    std::string prompt;
    for (const auto& example : tmpl.examples)
        prompt += "Question: " + example.question + "\nAnswer: " + example.answer + "\n\n";
    std::string body = replace_once(tmpl.text, "{context}", context);
    body = replace_once(std::move(body), "{question}", question);
    prompt += body;
    return prompt;
}

std::string assemble_context(const std::vector<RetrievedChunk>& selected,
                             const ChunkDatabase& db) {
    std::string context;
    for (const auto& r : selected) {
        const Chunk* chunk = db.find(r.chunk_id);
        if (!chunk)
            throw Error(Stage::Generate, "retrieved chunk " + r.chunk_id +
                                             " is not in the database");
        if (!context.empty()) context += "\n\n";
        context += "[chunk " + chunk->chunk_id + " | level " +
                   std::string(level_name(chunk->level)) + "]\n" + chunk->text;
    }
    return context;
}

void ScriptedChatBackend::add(const std::string& question, std::string answer,
                              std::optional<std::string> requires_in_prompt) {
    entries_[fnv1a64(question)] = {std::move(answer), std::move(requires_in_prompt)};
}

ScriptedChatBackend ScriptedChatBackend::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Stage::Generate, "cannot open transcript file " + path);
    ScriptedChatBackend backend;
    std::string line;
    long line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
        if (record.is_discarded())
            throw Error(Stage::Generate, "transcript line " + std::to_string(line_number) +
                                             " is not valid JSON");
        std::optional<std::string> requires_fragment;
        if (record.contains("requires"))
            requires_fragment = record.at("requires").get<std::string>();
        backend.add(record.at("question").get<std::string>(),
                    record.at("answer").get<std::string>(), std::move(requires_fragment));
    }
    return backend;
}

std::string ScriptedChatBackend::complete(const ChatRequest& request) {
    auto it = entries_.find(fnv1a64(request.question));
    if (it == entries_.end()) return miss_answer_;
    const Entry& entry = it->second;
    if (entry.requires_in_prompt &&
        request.prompt.find(*entry.requires_in_prompt) == std::string::npos)
        return miss_answer_;
    return entry.answer;
}

AnswerRecord generate_answer(const std::string& question, const std::string& context,
                             const PromptTemplate& tmpl, ChatBackend& backend,
                             const RetryPolicy& retry) {
    validate_template(tmpl);
    std::string prompt = assemble_prompt(tmpl, context, question);

    std::string answer;
    std::string last_error;
    auto delay = retry.initial_delay;
    int attempts = std::max(retry.attempts, 1);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        try {
            answer = backend.complete({prompt, question});
            if (answer.empty()) throw BackendError(Stage::Generate, "backend returned an empty answer");
            break;
        } catch (const std::exception& e) {
            last_error = e.what();
            answer.clear();
            if (attempt == attempts)
                throw Error(Stage::Generate, "answer generation failed after " +
                                                 std::to_string(attempts) +
                                                 " attempts: " + last_error);
            std::this_thread::sleep_for(delay);
            delay = std::chrono::milliseconds(
                static_cast<long>(static_cast<double>(delay.count()) * retry.multiplier));
        }
    }

    AnswerRecord record;
    record.question = question;
    record.answer = std::move(answer);
    record.backend_id = backend.backend_id();
    record.prompt_bytes = prompt.size();
    record.context_text = context;
    return record;
}

}  // namespace malrag
