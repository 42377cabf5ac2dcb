#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace malrag {

/// Text embedding contract. All returned vectors must have the declared
/// dimension; vectors for non-empty token streams must be nonzero.
class EmbedderBackend {
public:
    virtual ~EmbedderBackend() = default;

    virtual std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) = 0;
    virtual std::string backend_id() const = 0;
    virtual std::size_t dimension() const = 0;
};

/// Deterministic mock: lowercase, tokenize on whitespace, hash each token
/// into one of `dimension` buckets with a fixed 64-bit seed, accumulate
/// counts, L2-normalize. Gives meaningful lexical similarity for tests.
/// Text with no tokens embeds to the zero vector, which downstream scoring
/// rejects.
class HashedBagEmbedder : public EmbedderBackend {
public:
    explicit HashedBagEmbedder(std::size_t dimension = 256) : dimension_(dimension) {}

    std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override;
    std::string backend_id() const override;
    std::size_t dimension() const override { return dimension_; }

    std::vector<float> embed_one(const std::string& text) const;

private:
    std::size_t dimension_;
};

}  // namespace malrag
