#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "malrag/retriever.hpp"

namespace malrag {

class ChunkDatabase;

struct IclExample {
    std::string question;
    std::string answer;
};

/// Answer-generation template. Must contain `{context}` and `{question}`
/// exactly once each; optional in-context examples are prepended verbatim as
/// Question/Answer pairs.
struct PromptTemplate {
    std::string text = "Context:\n{context}\n\nQuestion: {question}\nAnswer:";
    std::vector<IclExample> examples;

    static PromptTemplate load(const std::string& path);
};

/// Throws on a missing or repeated placeholder.
void validate_template(const PromptTemplate& tmpl);

/// Pure prompt assembly: examples, then the template with both placeholders
/// substituted. Byte-identical inputs yield byte-identical prompts.
std::string assemble_prompt(const PromptTemplate& tmpl, const std::string& context,
                            const std::string& question);

/// Retrieved chunks concatenated in retrieval order, each prefixed by a
/// `[chunk <id> | level <name>]` header line and separated by blank lines.
std::string assemble_context(const std::vector<RetrievedChunk>& selected, const ChunkDatabase& db);

struct ChatRequest {
    std::string prompt;
    std::string question;  // mocks key off this; HTTP backends use the prompt only
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;

    virtual std::string complete(const ChatRequest& request) = 0;
    virtual std::string backend_id() const = 0;
};

/// Returns the question verbatim.
class EchoChatBackend : public ChatBackend {
public:
    std::string complete(const ChatRequest& request) override { return request.question; }
    std::string backend_id() const override { return "echo"; }
};

/// Canned answers keyed by question hash. An entry may additionally require a
/// text fragment to be present in the prompt (i.e. retrieved into the
/// context); otherwise the miss answer is returned. This is what makes
/// desk-scale evaluation runs scriptable: a question is answerable iff its
/// required chunk was retrieved.
class ScriptedChatBackend : public ChatBackend {
public:
    struct Entry {
        std::string answer;
        std::optional<std::string> requires_in_prompt;
    };

    void add(const std::string& question, std::string answer,
             std::optional<std::string> requires_in_prompt = std::nullopt);
    void set_miss_answer(std::string answer) { miss_answer_ = std::move(answer); }

    /// Transcript file: one JSON record per line with fields question, answer
    /// and optional requires.
    static ScriptedChatBackend load(const std::string& path);

    std::string complete(const ChatRequest& request) override;
    std::string backend_id() const override { return "scripted"; }

private:
    std::map<std::uint64_t, Entry> entries_;
    std::string miss_answer_ = "No relevant information found.";
};

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_delay{250};
    double multiplier = 2.0;
};

struct AnswerRecord {
    std::string question;
    std::string answer;
    std::string retrieval_ref;  // audit linkage (question id or audit record key)
    std::string backend_id;
    std::size_t prompt_bytes = 0;
    std::optional<std::string> context_text;  // carried for context metrics
};

/// Substitutes the placeholders, prepends examples, calls the backend once
/// per attempt under the retry policy (exponential backoff), and returns the
/// record. Template validation happens before any backend call; an empty
/// answer is an error.
AnswerRecord generate_answer(const std::string& question, const std::string& context,
                             const PromptTemplate& tmpl, ChatBackend& backend,
                             const RetryPolicy& retry = {});

}  // namespace malrag
