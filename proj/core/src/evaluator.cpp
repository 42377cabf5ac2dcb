#include "malrag/evaluator.hpp"

#include <cctype>
#include <fstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "malrag/corpus.hpp"
#include "malrag/errors.hpp"

namespace malrag {

std::vector<QAPair> load_qa_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open qa file " + path);
    std::vector<QAPair> pairs;
    std::string line;
    long line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
        if (record.is_discarded()) throw ParseError("invalid JSON", line_number);
        QAPair pair;
        try {
            pair.question_id = record.at("question_id").get<std::string>();
            pair.question = record.at("question").get<std::string>();
            pair.ground_truth = record.at("ground_truth").get<std::string>();
            if (record.contains("provenance"))
                pair.provenance = record.at("provenance").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("bad qa record: ") + e.what(), line_number);
        }
        if (pair.question_id.empty()) throw ParseError("empty question_id", line_number);
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

void write_qa_file(const std::vector<QAPair>& pairs, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ParseError("cannot open qa file " + path + " for writing");
    for (const auto& pair : pairs) {
        nlohmann::json record = {
            {"question_id", pair.question_id},
            {"question", pair.question},
            {"ground_truth", pair.ground_truth},
        };
        if (pair.provenance) record["provenance"] = *pair.provenance;
        out << record.dump() << '\n';
    }
}

std::string ExactMatchJudge::normalize(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char raw : text) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (std::ispunct(c)) continue;
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += static_cast<char>(std::tolower(c));
    }
    return out;
}

bool ExactMatchJudge::match(const std::string& a, const std::string& b) {
    std::string na = normalize(a);
    return !na.empty() && na == normalize(b);
}

std::vector<std::string> decompose_statements(const std::string& text) {
    return split_sentences(text);
}

MatchCounts count_matches(const std::vector<std::string>& gt_statements,
                          const std::vector<std::string>& answer_statements,
                          StatementJudge& judge) {
    MatchCounts counts;
    std::vector<bool> gt_used(gt_statements.size(), false);
    for (const auto& answer : answer_statements) {
        bool matched = false;
        for (std::size_t i = 0; i < gt_statements.size(); ++i) {
            if (gt_used[i]) continue;
            if (judge.match(gt_statements[i], answer)) {
                gt_used[i] = true;
                matched = true;
                break;
            }
        }
        if (matched)
            ++counts.tp;
        else
            ++counts.fp;
    }
    counts.fn = gt_statements.size() - counts.tp;
    return counts;
}

double f1_score(std::size_t tp, std::size_t fp, std::size_t fn) {
    if (tp + fp + fn == 0) return 0.0;
    double denominator = static_cast<double>(tp) + 0.5 * static_cast<double>(fp + fn);
    return static_cast<double>(tp) / denominator;
}

double context_recall(const std::vector<std::string>& gt_statements,
                      const std::string& retrieved_context_text, StatementJudge& judge) {
    if (gt_statements.empty()) return 0.0;
    auto context_statements = decompose_statements(retrieved_context_text);
    std::size_t supported = 0;
    for (const auto& gt : gt_statements) {
        for (const auto& ctx : context_statements) {
            if (judge.match(gt, ctx)) {
                ++supported;
                break;
            }
        }
    }
    return static_cast<double>(supported) / static_cast<double>(gt_statements.size());
}

EvalReport evaluate_run(const std::vector<QAPair>& qa_pairs,
                        const std::vector<AnswerRecord>& answer_records, StatementJudge& judge) {
    std::unordered_map<std::string, const AnswerRecord*> by_question;
    for (const auto& record : answer_records) by_question.emplace(record.question, &record);

    EvalReport report;
    double f1_sum = 0.0;
    double recall_sum = 0.0;
    std::size_t recall_count = 0;

    for (const auto& pair : qa_pairs) {
        QuestionEval q;
        q.question_id = pair.question_id;
        auto gt_statements = decompose_statements(pair.ground_truth);
        const AnswerRecord* record = nullptr;
        if (auto it = by_question.find(pair.question); it != by_question.end())
            record = it->second;

        try {
            if (record) {
                auto answer_statements = decompose_statements(record->answer);
                auto counts = count_matches(gt_statements, answer_statements, judge);
                q.tp = counts.tp;
                q.fp = counts.fp;
                q.fn = counts.fn;
                if (record->context_text)
                    q.context_recall = context_recall(gt_statements, *record->context_text, judge);
            } else {
                q.fn = gt_statements.size();
            }
            q.f1 = f1_score(q.tp, q.fp, q.fn);
        } catch (const std::exception& e) {
            q.evaluated = false;
            q.error = e.what();
        }

        if (q.evaluated) {
            f1_sum += q.f1;
            if (q.context_recall) {
                recall_sum += *q.context_recall;
                ++recall_count;
            }
            ++report.evaluated_count;
        } else {
            ++report.excluded_count;
        }
        report.questions.push_back(std::move(q));
    }

    if (report.evaluated_count > 0) report.mean_f1 = f1_sum / report.evaluated_count;
    if (recall_count > 0) report.mean_context_recall = recall_sum / recall_count;
    return report;
}

void write_report_file(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(Stage::Evaluate, "cannot open report file " + path + " for writing");
    nlohmann::json summary = {
        {"record", "summary"},
        {"mean_f1", report.mean_f1},
        {"evaluated_count", report.evaluated_count},
        {"excluded_count", report.excluded_count},
    };
    if (report.mean_context_recall) summary["mean_context_recall"] = *report.mean_context_recall;
    out << summary.dump() << '\n';
    for (const auto& q : report.questions) {
        nlohmann::json record = {
            {"record", "question"}, {"question_id", q.question_id}, {"tp", q.tp},
            {"fp", q.fp},           {"fn", q.fn},                   {"f1", q.f1},
            {"evaluated", q.evaluated},
        };
        if (q.context_recall) record["context_recall"] = *q.context_recall;
        if (!q.error.empty()) record["error"] = q.error;
        out << record.dump() << '\n';
    }
}

}  // namespace malrag
