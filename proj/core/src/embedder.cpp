#include "malrag/embedder.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "malrag/hash.hpp"

namespace malrag {

std::vector<std::vector<float>> HashedBagEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    for (const auto& text : texts) out.push_back(embed_one(text));
    return out;
}

std::string HashedBagEmbedder::backend_id() const {
    return "hashed-bag-" + std::to_string(dimension_);
}

std::vector<float> HashedBagEmbedder::embed_one(const std::string& text) const {
    std::vector<float> v(dimension_, 0.0f);
    std::string lowered = text;
    for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::istringstream in(lowered);
    std::string token;
    bool any = false;
    while (in >> token) {
        v[fnv1a64(token) % dimension_] += 1.0f;
        any = true;
    }
    if (!any) return v;
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    for (float& x : v) x = static_cast<float>(x / norm);
    return v;
}

}  // namespace malrag
