#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "malrag/corpus.hpp"

namespace malrag::testing {

/// 3 documents x 2 sections x 2 paragraphs x 4 sentences of 12 words each.
/// Every sentence carries four tokens unique to its (doc, section, paragraph,
/// sentence) position, so no two chunks share a full token multiset.
std::vector<Document> toy_corpus();

/// One sentence of the toy corpus, for building queries and oracles.
std::string toy_sentence(std::size_t doc, std::size_t section, std::size_t paragraph,
                         std::size_t sentence);

void write_corpus_to(const std::vector<Document>& documents, const std::filesystem::path& path);

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();

    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace malrag::testing
