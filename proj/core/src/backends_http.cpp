#include "malrag/backends_http.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "malrag/errors.hpp"

namespace malrag {

namespace {

using nlohmann::json;

httplib::Headers auth_headers(const HttpBackendConfig& config) {
    httplib::Headers headers;
    if (const char* token = std::getenv(config.token_env.c_str()); token && *token)
        headers.emplace("Authorization", std::string("Bearer ") + token);
    return headers;
}

/// POSTs JSON with the config's retry policy. `parse` must either return the
/// extracted value or throw; any throw counts as a failed attempt.
template <typename Parse>
auto post_json(const HttpBackendConfig& config, Stage stage, const std::string& path,
               const json& body, Parse parse) -> decltype(parse(json{})) {
    std::string payload = body.dump();
    std::string last_error;
    auto delay = config.retry.initial_delay;
    int attempts = std::max(config.retry.attempts, 1);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        try {
            httplib::Client client(config.base_url);
            client.set_connection_timeout(config.timeout_seconds);
            client.set_read_timeout(config.timeout_seconds);
            client.set_write_timeout(config.timeout_seconds);
            auto res = client.Post(path, auth_headers(config), payload, "application/json");
            if (!res)
                throw BackendError(stage, "no response from " + config.base_url + path + ": " +
                                              httplib::to_string(res.error()));
            if (res->status != 200)
                throw BackendError(stage, config.base_url + path + " returned status " +
                                              std::to_string(res->status));
            json reply = json::parse(res->body, nullptr, false);
            if (reply.is_discarded())
                throw BackendError(stage, config.base_url + path + " returned invalid JSON");
            return parse(reply);
        } catch (const std::exception& e) {
            last_error = e.what();
            if (attempt == attempts) break;
            std::this_thread::sleep_for(delay);
            delay = std::chrono::milliseconds(
                static_cast<long>(static_cast<double>(delay.count()) * config.retry.multiplier));
        }
    }
    throw BackendError(stage, "request failed after " + std::to_string(attempts) +
                                  " attempts: " + last_error);
}

std::string chat_complete(const HttpBackendConfig& config, Stage stage,
                          const std::string& prompt) {
    json body = {
        {"model", config.model},
        {"messages", {{{"role", "user"}, {"content", prompt}}}},
    };
    return post_json(config, stage, "/v1/chat/completions", body, [&](const json& reply) {
        if (!reply.contains("choices") || reply.at("choices").empty())
            throw BackendError(stage, "chat response has no choices");
        std::string content =
            reply.at("choices").at(0).at("message").at("content").get<std::string>();
        if (content.empty()) throw BackendError(stage, "chat response content is empty");
        return content;
    });
}

std::string join_with_blank_lines(const std::vector<std::string>& texts) {
    std::string joined;
    for (const auto& t : texts) {
        if (!joined.empty()) joined += "\n\n";
        joined += t;
    }
    return joined;
}

void require_placeholder(const std::string& template_text, const std::string& placeholder,
                         Stage stage) {
    if (template_text.find(placeholder) == std::string::npos)
        throw Error(stage, "template is missing the " + placeholder + " placeholder");
}

std::string substitute(std::string template_text, const std::string& placeholder,
                       const std::string& value) {
    for (auto pos = template_text.find(placeholder); pos != std::string::npos;
         pos = template_text.find(placeholder, pos + value.size()))
        template_text.replace(pos, placeholder.size(), value);
    return template_text;
}

}  // namespace

std::string HttpChatBackend::complete(const ChatRequest& request) {
    return chat_complete(config_, Stage::Generate, request.prompt);
}

HttpExtractorBackend::HttpExtractorBackend(HttpBackendConfig config)
    : config_(std::move(config)) {
    templates_[TaskKind::ParagraphSummary] =
        "Extract the key information from the following paragraph as a short factual "
        "summary. Reply with the summary only.\n\n{input}";
    templates_[TaskKind::SectionAggregate] =
        "Combine the following paragraph summaries into one concise section summary. "
        "Reply with the summary only.\n\n{input}";
    templates_[TaskKind::DocumentAggregate] =
        "Combine the following section summaries into one concise document summary. "
        "Reply with the summary only.\n\n{input}";
}

void HttpExtractorBackend::set_template(TaskKind kind, std::string template_text) {
    require_placeholder(template_text, "{input}", Stage::Summarize);
    templates_[kind] = std::move(template_text);
}

void HttpExtractorBackend::load_template_file(TaskKind kind, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Stage::Summarize, "cannot open template file " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    set_template(kind, std::move(text));
}

const std::string& HttpExtractorBackend::template_text(TaskKind kind) const {
    return templates_.at(kind);
}

std::string HttpExtractorBackend::extract(TaskKind kind,
                                          const std::vector<std::string>& input_texts) {
    if (input_texts.empty())
        throw BackendError(Stage::Summarize, "extractor called with no input");
    std::string prompt =
        substitute(templates_.at(kind), "{input}", join_with_blank_lines(input_texts));
    return chat_complete(config_, Stage::Summarize, prompt);
}

HttpEmbedderBackend::HttpEmbedderBackend(HttpBackendConfig config, std::size_t dimension)
    : config_(std::move(config)), dimension_(dimension) {
    if (config_.token_env == HttpBackendConfig{}.token_env)
        config_.token_env = "MALRAG_EMBED_TOKEN";
}

std::vector<std::vector<float>> HttpEmbedderBackend::embed(const std::vector<std::string>& texts) {
    json body = {{"model", config_.model}, {"input", texts}};
    return post_json(config_, Stage::Embed, "/v1/embeddings", body, [&](const json& reply) {
        if (!reply.contains("data"))
            throw BackendError(Stage::Embed, "embedding response has no data");
        const json& data = reply.at("data");
        if (data.size() != texts.size())
            throw BackendError(Stage::Embed, "embedding response has " +
                                                 std::to_string(data.size()) + " vectors for " +
                                                 std::to_string(texts.size()) + " inputs");
        std::vector<std::vector<float>> vectors;
        vectors.reserve(data.size());
        for (const auto& item : data) {
            const json& embedding = item.at("embedding");
            if (embedding.size() != dimension_)
                throw BackendError(Stage::Embed,
                                   "embedding has dimension " + std::to_string(embedding.size()) +
                                       ", expected " + std::to_string(dimension_));
            std::vector<float> v;
            v.reserve(dimension_);
            for (const auto& value : embedding) v.push_back(value.get<float>());
            vectors.push_back(std::move(v));
        }
        return vectors;
    });
}

HttpStatementJudge::HttpStatementJudge(HttpBackendConfig config) : config_(std::move(config)) {
    template_ =
        "Do the following two statements convey the same fact? Answer yes or no.\n\n"
        "Statement A: {a}\nStatement B: {b}";
}

void HttpStatementJudge::set_template(std::string template_text) {
    require_placeholder(template_text, "{a}", Stage::Evaluate);
    require_placeholder(template_text, "{b}", Stage::Evaluate);
    template_ = std::move(template_text);
}

bool HttpStatementJudge::match(const std::string& statement_a, const std::string& statement_b) {
    std::string prompt = substitute(template_, "{a}", statement_a);
    prompt = substitute(prompt, "{b}", statement_b);
    std::string reply = chat_complete(config_, Stage::Evaluate, prompt);
    std::size_t i = 0;
    while (i < reply.size() && std::isspace(static_cast<unsigned char>(reply[i]))) ++i;
    std::string head = reply.substr(i, 3);
    for (char& c : head) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return head == "yes";
}

}  // namespace malrag
