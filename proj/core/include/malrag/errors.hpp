#pragma once

#include <stdexcept>
#include <string>

namespace malrag {

/// Pipeline stage a failure belongs to. Values double as process exit codes.
enum class Stage : int {
    Parse = 2,
    Summarize = 3,
    Embed = 4,
    Retrieve = 5,
    Generate = 6,
    Evaluate = 7,
};

constexpr const char* stage_name(Stage stage) {
    switch (stage) {
        case Stage::Parse: return "parse";
        case Stage::Summarize: return "summarize";
        case Stage::Embed: return "embed";
        case Stage::Retrieve: return "retrieve";
        case Stage::Generate: return "generate";
        case Stage::Evaluate: return "evaluate";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(Stage stage, std::string message)
        : std::runtime_error(std::move(message)), stage_(stage) {}

    Stage stage() const { return stage_; }
    int exit_code() const { return static_cast<int>(stage_); }

private:
    Stage stage_;
};

class ParseError : public Error {
public:
    explicit ParseError(std::string message, long line = -1)
        : Error(Stage::Parse, line >= 0 ? "line " + std::to_string(line) + ": " + message
                                        : std::move(message)),
          line_(line) {}

    long line() const { return line_; }

private:
    long line_ = -1;
};

class BackendError : public Error {
public:
    BackendError(Stage stage, std::string message) : Error(stage, std::move(message)) {}
};

}  // namespace malrag
