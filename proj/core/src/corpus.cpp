#include "malrag/corpus.hpp"

#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "malrag/errors.hpp"

namespace malrag {

using json = nlohmann::json;

namespace {

// Byte length of the whitespace run starting at `i`, or 0 if text[i] does not
// start one. Covers ASCII whitespace and the common Unicode space code points
// (NBSP, ogham space, en/em spaces, line/paragraph separators, narrow NBSP,
// math space, ideographic space, NEL).
std::size_t whitespace_run_at(std::string_view text, std::size_t i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r') return 1;
    auto has = [&](std::size_t off) { return i + off < text.size(); };
    auto byte = [&](std::size_t off) { return static_cast<unsigned char>(text[i + off]); };
    if (c == 0xC2 && has(1) && (byte(1) == 0xA0 || byte(1) == 0x85)) return 2;  // U+00A0, U+0085
    if (c == 0xE1 && has(2) && byte(1) == 0x9A && byte(2) == 0x80) return 3;    // U+1680
    if (c == 0xE2 && has(2)) {
        if (byte(1) == 0x80) {
            unsigned char b2 = byte(2);
            if ((b2 >= 0x80 && b2 <= 0x8A) || b2 == 0xA8 || b2 == 0xA9 || b2 == 0xAF)
                return 3;  // U+2000..U+200A, U+2028, U+2029, U+202F
        }
        if (byte(1) == 0x81 && byte(2) == 0x9F) return 3;  // U+205F
    }
    if (c == 0xE3 && has(2) && byte(1) == 0x80 && byte(2) == 0x80) return 3;  // U+3000
    return 0;
}

}  // namespace

std::size_t word_count(std::string_view text) {
    std::size_t count = 0;
    std::size_t i = 0;
    bool in_word = false;
    while (i < text.size()) {
        std::size_t run = whitespace_run_at(text, i);
        if (run > 0) {
            in_word = false;
            i += run;
        } else {
            if (!in_word) {
                ++count;
                in_word = true;
            }
            ++i;
        }
    }
    return count;
}

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    bool pending_space = false;
    while (i < text.size()) {
        std::size_t run = whitespace_run_at(text, i);
        if (run > 0) {
            pending_space = !out.empty();
            i += run;
        } else {
            if (pending_space) {
                out += ' ';
                pending_space = false;
            }
            out += text[i];
            ++i;
        }
    }
    return out;
}

namespace {

Document parse_record(const json& rec, long line) {
    if (!rec.is_object()) throw ParseError("record is not a JSON object", line);

    auto require = [&](const char* field) -> const json& {
        auto it = rec.find(field);
        if (it == rec.end()) throw ParseError(std::string("missing field '") + field + "'", line);
        return *it;
    };

    Document doc;
    const json& id = require("doc_id");
    if (!id.is_string() || id.get<std::string>().empty())
        throw ParseError("field 'doc_id' must be a non-empty string", line);
    doc.doc_id = id.get<std::string>();

    const json& title = require("title");
    if (!title.is_string()) throw ParseError("field 'title' must be a string", line);
    doc.title = title.get<std::string>();

    const json& sections = require("sections");
    if (!sections.is_array()) throw ParseError("field 'sections' must be an array", line);
    if (sections.empty())
        throw ParseError("document '" + doc.doc_id + "' has zero sections", line);

    for (const auto& sec : sections) {
        if (!sec.is_object()) throw ParseError("section entry is not an object", line);
        Section section;
        section.section_index = doc.sections.size();
        auto h = sec.find("heading");
        if (h == sec.end() || !h->is_string())
            throw ParseError("missing field 'heading' in section", line);
        section.heading = h->get<std::string>();
        auto ps = sec.find("paragraphs");
        if (ps == sec.end() || !ps->is_array())
            throw ParseError("missing field 'paragraphs' in section", line);
        if (ps->empty())
            throw ParseError("document '" + doc.doc_id + "' section " +
                                 std::to_string(section.section_index) + " has zero paragraphs",
                             line);
        for (const auto& p : *ps) {
            if (!p.is_string()) throw ParseError("field 'paragraphs' must hold strings", line);
            Paragraph paragraph;
            paragraph.paragraph_index = section.paragraphs.size();
            paragraph.text = normalize_whitespace(p.get<std::string>());
            if (paragraph.text.empty())
                throw ParseError("document '" + doc.doc_id + "' section " +
                                     std::to_string(section.section_index) + " paragraph " +
                                     std::to_string(paragraph.paragraph_index) +
                                     " is empty after normalization",
                                 line);
            section.paragraphs.push_back(std::move(paragraph));
        }
        doc.sections.push_back(std::move(section));
    }
    return doc;
}

}  // namespace

std::vector<Document> parse_corpus_file(std::istream& in) {
    std::vector<Document> documents;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded()) throw ParseError("invalid JSON record", line_no);
        Document doc = parse_record(rec, line_no);
        if (!seen_ids.insert(doc.doc_id).second)
            throw ParseError("duplicate doc_id '" + doc.doc_id + "'", line_no);
        documents.push_back(std::move(doc));
    }
    return documents;
}

std::vector<Document> parse_corpus_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open corpus file: " + path);
    return parse_corpus_file(in);
}

void write_corpus_file(const std::vector<Document>& documents, std::ostream& out) {
    for (const auto& doc : documents) {
        json rec;
        rec["doc_id"] = doc.doc_id;
        rec["title"] = doc.title;
        json sections = json::array();
        for (const auto& sec : doc.sections) {
            json s;
            s["heading"] = sec.heading;
            json ps = json::array();
            for (const auto& p : sec.paragraphs) ps.push_back(p.text);
            s["paragraphs"] = std::move(ps);
            sections.push_back(std::move(s));
        }
        rec["sections"] = std::move(sections);
        out << rec.dump() << '\n';
    }
}

void write_corpus_file(const std::vector<Document>& documents, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    write_corpus_file(documents, out);
}

}  // namespace malrag
