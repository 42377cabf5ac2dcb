#pragma once

#include <optional>
#include <string>
#include <vector>

#include "malrag/answer.hpp"
#include "malrag/sentence.hpp"

namespace malrag {

struct QAPair {
    std::string question_id;
    std::string question;
    std::string ground_truth;
    std::optional<std::string> provenance;  // doc_id/level hint, free-form
};

/// Q/A dataset file: one JSON record per line with fields question_id,
/// question, ground_truth and optional provenance.
std::vector<QAPair> load_qa_file(const std::string& path);
void write_qa_file(const std::vector<QAPair>& pairs, const std::string& path);

/// Statement matching contract. The exact-match mock is symmetric; LLM judges
/// need not be.
class StatementJudge {
public:
    virtual ~StatementJudge() = default;

    virtual bool match(const std::string& statement_a, const std::string& statement_b) = 0;
    virtual std::string backend_id() const = 0;
};

/// Lowercases, strips punctuation, collapses whitespace, compares equal.
class ExactMatchJudge : public StatementJudge {
public:
    bool match(const std::string& a, const std::string& b) override;
    std::string backend_id() const override { return "exact"; }

    static std::string normalize(std::string_view text);
};

/// One statement per sentence, via the shared sentence splitter.
std::vector<std::string> decompose_statements(const std::string& text);

struct MatchCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

/// Greedy one-to-one matching: answer statements in order, each matched to
/// the first unmatched ground-truth statement the judge accepts. Guarantees
/// tp + fn = |gt| and tp + fp = |answer|.
MatchCounts count_matches(const std::vector<std::string>& gt_statements,
                          const std::vector<std::string>& answer_statements,
                          StatementJudge& judge);

/// F1 = tp / (tp + 0.5 (fp + fn)); (0,0,0) scores 0 so empty answers against
/// empty ground truth are never rewarded.
double f1_score(std::size_t tp, std::size_t fp, std::size_t fn);

/// Fraction of ground-truth statements the judge finds supported by some
/// statement of the retrieved context.
double context_recall(const std::vector<std::string>& gt_statements,
                      const std::string& retrieved_context_text, StatementJudge& judge);

struct QuestionEval {
    std::string question_id;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double f1 = 0.0;
    std::optional<double> context_recall;
    bool evaluated = true;  // false when the judge failed; excluded from aggregates
    std::string error;
};

struct EvalReport {
    std::vector<QuestionEval> questions;
    double mean_f1 = 0.0;
    std::optional<double> mean_context_recall;
    std::size_t evaluated_count = 0;
    std::size_t excluded_count = 0;
};

/// Per-question metrics plus arithmetic-mean aggregates. A question with no
/// answer record scores tp=0, fp=0, fn=|gt|. Judge failures mark the question
/// unevaluated and keep the run going.
EvalReport evaluate_run(const std::vector<QAPair>& qa_pairs,
                        const std::vector<AnswerRecord>& answer_records, StatementJudge& judge);

void write_report_file(const EvalReport& report, const std::string& path);

}  // namespace malrag
