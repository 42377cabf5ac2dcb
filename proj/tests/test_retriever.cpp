#include <doctest.h>

#include <map>

#include "malrag/errors.hpp"
#include "malrag/retriever.hpp"

using namespace malrag;

namespace {

Chunk sized_chunk(const std::string& id, std::size_t words,
                  ChunkLevel level = ChunkLevel::Paragraph) {
    Chunk c;
    c.chunk_id = id;
    c.level = level;
    for (std::size_t i = 0; i < words; ++i) {
        if (!c.text.empty()) c.text += ' ';
        c.text += "w" + std::to_string(i);
    }
    c.words = words;
    c.provenance.doc_id = "d";
    c.provenance.section_index = 0;
    c.provenance.paragraph_range = IndexRange{0, 0};
    if (level == ChunkLevel::MultiSentence) c.provenance.sentence_range = IndexRange{0, 0};
    c.is_summary = level == ChunkLevel::Section || level == ChunkLevel::Document;
    if (c.is_summary && c.text.empty()) {
        c.text = "s";
        c.words = 1;
    }
    return c;
}

/// Embeds by exact text lookup, giving tests full control over similarities.
class StubEmbedder : public EmbedderBackend {
public:
    void map_text(const std::string& text, std::vector<float> vector) {
        vectors_[text] = std::move(vector);
    }
    std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override {
        std::vector<std::vector<float>> out;
        for (const auto& t : texts) {
            auto it = vectors_.find(t);
            if (it == vectors_.end())
                throw BackendError(Stage::Embed, "stub has no vector for: " + t);
            out.push_back(it->second);
        }
        return out;
    }
    std::string backend_id() const override { return "stub-2d"; }
    std::size_t dimension() const override { return 2; }

private:
    std::map<std::string, std::vector<float>> vectors_;
};

ScoredChunk scored(const std::string& id, double sim) { return {id, sim}; }

}  // namespace

TEST_SUITE("budget packing") {

TEST_CASE("skip rule walks past a chunk that does not fit") {
    ChunkDatabase db;
    db.add_chunk(sized_chunk("A", 50));
    db.add_chunk(sized_chunk("B", 60));
    db.add_chunk(sized_chunk("C", 30));
    std::vector<ScoredChunk> order = {scored("A", 0.9), scored("B", 0.8), scored("C", 0.7)};

    auto picked = select_by_budget(order, db, 100, PackingRule::Skip);
    REQUIRE(picked.size() == 2);
    CHECK(picked[0].chunk_id == "A");
    CHECK(picked[1].chunk_id == "C");  // B at 50+60 > 100 is skipped
}

TEST_CASE("stop rule ends at the first overflow") {
    ChunkDatabase db;
    db.add_chunk(sized_chunk("A", 50));
    db.add_chunk(sized_chunk("B", 60));
    db.add_chunk(sized_chunk("C", 30));
    std::vector<ScoredChunk> order = {scored("A", 0.9), scored("B", 0.8), scored("C", 0.7)};

    auto picked = select_by_budget(order, db, 100, PackingRule::Stop);
    REQUIRE(picked.size() == 1);
    CHECK(picked[0].chunk_id == "A");
}

TEST_CASE("an oversize top hit is skipped, not fatal") {
    ChunkDatabase db;
    db.add_chunk(sized_chunk("big", 200));
    db.add_chunk(sized_chunk("small", 50));
    std::vector<ScoredChunk> order = {scored("big", 0.99), scored("small", 0.5)};

    auto skip = select_by_budget(order, db, 100, PackingRule::Skip);
    REQUIRE(skip.size() == 1);
    CHECK(skip[0].chunk_id == "small");

    auto stop = select_by_budget(order, db, 100, PackingRule::Stop);
    CHECK(stop.empty());
}

TEST_CASE("budget boundary is inclusive") {
    ChunkDatabase db;
    db.add_chunk(sized_chunk("A", 50));
    db.add_chunk(sized_chunk("B", 50));
    std::vector<ScoredChunk> order = {scored("A", 0.9), scored("B", 0.8)};
    auto picked = select_by_budget(order, db, 100, PackingRule::Skip);
    CHECK(picked.size() == 2);
}

TEST_CASE("unknown chunk id in the score list is an error") {
    ChunkDatabase db;
    db.add_chunk(sized_chunk("A", 10));
    std::vector<ScoredChunk> order = {scored("ghost", 0.9)};
    CHECK_THROWS_AS(select_by_budget(order, db, 100), Error);
}

}  // TEST_SUITE

TEST_SUITE("softmax") {

TEST_CASE("reference distribution") {
    std::vector<ScoredChunk> sel = {scored("a", 0.9), scored("b", 0.7), scored("c", 0.5),
                                    scored("d", 0.1)};
    auto p = softmax_probabilities(sel);
    REQUIRE(p.size() == 4);
    CHECK(p[0] == doctest::Approx(0.340323607082).epsilon(1e-9));
    CHECK(p[1] == doctest::Approx(0.278633403117).epsilon(1e-9));
    CHECK(p[2] == doctest::Approx(0.228125735966).epsilon(1e-9));
    CHECK(p[3] == doctest::Approx(0.152917253835).epsilon(1e-9));
    double sum = p[0] + p[1] + p[2] + p[3];
    CHECK(std::abs(sum - 1.0) < 1e-9);
}

TEST_CASE("equal scores share mass equally") {
    auto p = softmax_probabilities({scored("a", 0.5), scored("b", 0.5)});
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));
}

TEST_CASE("single chunk gets probability one") {
    auto p = softmax_probabilities({scored("a", -3.0)});
    REQUIRE(p.size() == 1);
    CHECK(p[0] == doctest::Approx(1.0));
}

TEST_CASE("invariant under score shifts") {
    auto p1 = softmax_probabilities({scored("a", 0.9), scored("b", 0.1)});
    auto p2 = softmax_probabilities({scored("a", 100.9), scored("b", 100.1)});
    CHECK(p1[0] == doctest::Approx(p2[0]).epsilon(1e-12));
}

TEST_CASE("empty selection yields empty distribution") {
    CHECK(softmax_probabilities({}).empty());
}

}  // TEST_SUITE

TEST_SUITE("threshold") {

TEST_CASE("maximal prefix within tau") {
    std::vector<double> probs = {0.340323607082, 0.278633403117, 0.228125735966, 0.152917253835};
    bool first = false;
    CHECK(apply_threshold(probs, 0.5, &first) == 1);  // 0.340 <= 0.5 < 0.619
    CHECK_FALSE(first);
    CHECK(apply_threshold(probs, 0.7, &first) == 2);  // 0.619 <= 0.7 < 0.847
    CHECK_FALSE(first);
    CHECK(apply_threshold(probs, 1.0, &first) == 4);
}

TEST_CASE("boundary: cumulative exactly tau is kept") {
    std::vector<double> probs = {0.5, 0.5};
    CHECK(apply_threshold(probs, 0.5) == 1);
}

TEST_CASE("first chunk is always retained") {
    std::vector<double> probs = {0.986703291042, 0.006648354479, 0.006648354479};
    bool first = false;
    CHECK(apply_threshold(probs, 0.5, &first) == 1);
    CHECK(first);
}

TEST_CASE("disabled tau keeps everything") {
    std::vector<double> probs = {0.9, 0.05, 0.05};
    bool first = true;
    CHECK(apply_threshold(probs, std::nullopt, &first) == 3);
    CHECK_FALSE(first);
}

TEST_CASE("empty input stays empty") {
    CHECK(apply_threshold({}, 0.5) == 0);
}

}  // TEST_SUITE

TEST_SUITE("retrieve") {

TEST_CASE("end to end with controlled similarities") {
    StubEmbedder embedder;
    embedder.map_text("qq", {1.0f, 0.0f});

    ChunkDatabase db;
    auto add = [&](const std::string& id, std::size_t words, std::vector<float> v) {
        auto c = sized_chunk(id, words);
        embedder.map_text(c.text, std::move(v));
        db.add_chunk(std::move(c));
    };
    // Integer components keep dot products and norms exact, so the
    // similarities are the doubles 1.0, 4/5, 3/5, 0.0 with no float noise.
    add("A", 50, {1.0f, 0.0f});   // sim 1.0
    add("B", 60, {4.0f, 3.0f});   // sim 0.8
    add("C", 30, {3.0f, 4.0f});   // sim 0.6
    add("D", 40, {0.0f, 1.0f});   // sim 0.0
    db.embed_all(embedder, 8);
    db.finalize();

    RetrieverConfig cfg;
    cfg.budget_words = 100;
    cfg.levels = {ChunkLevel::Paragraph};
    cfg.tau = 0.5;

    auto result = retrieve("qq", db, embedder, cfg);
    // budget walk: A(50) in, B overflows, C(30) in, D overflows
    REQUIRE(result.budget_stage.size() == 2);
    CHECK(result.k_budget_selected == 2);
    CHECK(result.budget_stage[0].chunk_id == "A");
    CHECK(result.budget_stage[1].chunk_id == "C");
    CHECK(result.budget_stage[0].similarity == doctest::Approx(1.0));
    CHECK(result.budget_stage[1].similarity == doctest::Approx(0.6));

    // softmax over sims {1.0, 0.6}: p0 = 1/(1+e^-0.4)
    CHECK(result.budget_stage[0].probability == doctest::Approx(0.598687660112452).epsilon(1e-12));
    CHECK(result.budget_stage[1].probability == doctest::Approx(0.401312339887548).epsilon(1e-12));
    CHECK(result.budget_stage[1].cumulative_probability == doctest::Approx(1.0));

    // tau 0.5: first cumulative 0.5987 > tau, kept by the always-keep rule
    REQUIRE(result.selected.size() == 1);
    CHECK(result.selected[0].chunk_id == "A");
    CHECK(result.first_chunk_exceeded_tau);
    CHECK(result.total_words == 50);
    CHECK(result.selected[0].words == 50);
    CHECK(result.selected[0].level == ChunkLevel::Paragraph);

    cfg.tau = std::nullopt;
    auto no_tau = retrieve("qq", db, embedder, cfg);
    CHECK(no_tau.selected.size() == 2);
    CHECK(no_tau.total_words == 80);
    CHECK_FALSE(no_tau.first_chunk_exceeded_tau);
}

TEST_CASE("level restriction is honored") {
    StubEmbedder embedder;
    embedder.map_text("qq", {1.0f, 0.0f});
    ChunkDatabase db;
    auto para = sized_chunk("p", 10, ChunkLevel::Paragraph);
    auto multi = sized_chunk("m", 10, ChunkLevel::MultiSentence);
    multi.text += " extra";
    multi.words += 1;
    embedder.map_text(para.text, {1.0f, 0.0f});
    embedder.map_text(multi.text, {1.0f, 0.0f});
    db.add_chunk(para);
    db.add_chunk(multi);
    db.embed_all(embedder, 8);
    db.finalize();

    RetrieverConfig cfg;
    cfg.levels = {ChunkLevel::MultiSentence};
    auto result = retrieve("qq", db, embedder, cfg);
    REQUIRE(result.selected.size() == 1);
    CHECK(result.selected[0].chunk_id == "m");
    CHECK(result.config.levels == cfg.levels);
}

}  // TEST_SUITE
