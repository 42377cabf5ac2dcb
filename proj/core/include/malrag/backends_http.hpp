#pragma once

#include <map>
#include <optional>
#include <string>

#include "malrag/answer.hpp"
#include "malrag/embedder.hpp"
#include "malrag/evaluator.hpp"
#include "malrag/summarizer.hpp"

namespace malrag {

/// Shared settings for the OpenAI-style HTTP adapters. The auth token is read
/// from the named environment variable at call time and sent as a Bearer
/// header when present.
struct HttpBackendConfig {
    std::string base_url = "http://localhost:8000";
    std::string model = "default";
    std::string token_env = "MALRAG_LLM_TOKEN";
    int timeout_seconds = 60;
    RetryPolicy retry;
};

/// POST {base_url}/v1/chat/completions with a single user message; the answer
/// is choices[0].message.content.
class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(HttpBackendConfig config) : config_(std::move(config)) {}

    std::string complete(const ChatRequest& request) override;
    std::string backend_id() const override { return "http-chat:" + config_.model; }

private:
    HttpBackendConfig config_;
};

/// Chat-completion summarizer. Each task kind has a prompt template with an
/// `{input}` placeholder; input texts are joined with blank lines before
/// substitution. Templates default to plain summarization instructions and
/// can be replaced per kind from files.
class HttpExtractorBackend : public ExtractorBackend {
public:
    explicit HttpExtractorBackend(HttpBackendConfig config);

    void set_template(TaskKind kind, std::string template_text);
    void load_template_file(TaskKind kind, const std::string& path);
    const std::string& template_text(TaskKind kind) const;

    std::string extract(TaskKind kind, const std::vector<std::string>& input_texts) override;
    std::string backend_id() const override { return "http-extractor:" + config_.model; }

private:
    HttpBackendConfig config_;
    std::map<TaskKind, std::string> templates_;
};

/// POST {base_url}/v1/embeddings; vectors come back in data[i].embedding and
/// must match the declared dimension. Token env defaults to
/// MALRAG_EMBED_TOKEN.
class HttpEmbedderBackend : public EmbedderBackend {
public:
    HttpEmbedderBackend(HttpBackendConfig config, std::size_t dimension);

    std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override;
    std::string backend_id() const override { return "http-embed:" + config_.model; }
    std::size_t dimension() const override { return dimension_; }

private:
    HttpBackendConfig config_;
    std::size_t dimension_;
};

/// Statement judge over the chat endpoint: asks whether two statements convey
/// the same fact and accepts an answer starting with "yes" (case-insensitive).
class HttpStatementJudge : public StatementJudge {
public:
    explicit HttpStatementJudge(HttpBackendConfig config);

    void set_template(std::string template_text);

    bool match(const std::string& statement_a, const std::string& statement_b) override;
    std::string backend_id() const override { return "http-judge:" + config_.model; }

private:
    HttpBackendConfig config_;
    std::string template_;
};

}  // namespace malrag
