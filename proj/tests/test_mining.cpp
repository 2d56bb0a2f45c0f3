#include "doctest.h"

#include <set>

#include "webart/mining.hpp"
#include "webart/synthetic.hpp"

#include "support.hpp"

using namespace webart;

namespace {

std::filesystem::path write_corpus_dir(const std::filesystem::path& dir,
                                       const std::vector<std::pair<std::string, Image>>& items) {
    std::filesystem::create_directories(dir);
    for (const auto& [name, img] : items) save_image(dir / name, img);
    return dir;
}

RetrievedCandidate candidate(const std::string& id, Image img, double sim = 0.5) {
    RetrievedCandidate c;
    c.record.id = id;
    c.record.image = std::move(img);
    c.similarity = sim;
    return c;
}

}  // namespace

TEST_CASE("retrieve_candidates agrees with brute-force cosine ranking") {
    test::TempDir tmp("mine");
    Rng rng(41);
    std::vector<std::pair<std::string, Image>> items;
    for (int i = 0; i < 3; ++i) {
        items.push_back({"img" + std::to_string(i) + ".ppm", test::random_image(12, 12, rng)});
    }
    write_corpus_dir(tmp.path() / "corpus", items);
    const auto corpus = CorpusReader::open(tmp.path() / "corpus");
    REQUIRE(corpus.size() == 3);

    const HashEmbeddingOracle oracle(16, 7);
    MiningConfig cfg;
    cfg.prompts = {"a photo of a graphic", "a logo"};
    cfg.keep_fraction = 0.34;  // ceil(0.34*3) = 2... exactly the top by similarity

    // Brute force: max-over-prompts cosine for each corpus image.
    const auto prompt_embs = oracle.embed_texts(cfg.prompts);
    std::vector<std::pair<double, std::string>> expected;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto rec = corpus.record(i);
        const auto emb = oracle.embed_images({rec.image}).at(0);
        double best = -2.0;
        for (const auto& p : prompt_embs) best = std::max(best, cosine(emb, p));
        expected.push_back({best, rec.id});
    }
    std::sort(expected.begin(), expected.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    const auto kept = retrieve_candidates(corpus, cfg, oracle);
    REQUIRE(kept.size() == 2);  // ceil(0.34 * 3)
    CHECK(kept[0].record.id == expected[0].second);
    CHECK(kept[0].similarity == doctest::Approx(expected[0].first).epsilon(1e-12));
    CHECK(kept[1].record.id == expected[1].second);

    SUBCASE("keep_fraction = 1.0 returns everything, sorted by similarity") {
        cfg.keep_fraction = 1.0;
        const auto all = retrieve_candidates(corpus, cfg, oracle);
        REQUIRE(all.size() == 3);
        for (std::size_t i = 0; i + 1 < all.size(); ++i) {
            CHECK(all[i].similarity >= all[i + 1].similarity);
        }
    }
}

TEST_CASE("the default keep fraction of 1 percent keeps ceil(N/100)") {
    test::TempDir tmp("mine100");
    Rng rng(4);
    std::vector<std::pair<std::string, Image>> items;
    for (int i = 0; i < 150; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "i%03d.ppm", i);
        items.push_back({name, test::random_image(6, 6, rng)});
    }
    write_corpus_dir(tmp.path() / "corpus", items);
    const auto corpus = CorpusReader::open(tmp.path() / "corpus");
    const HashEmbeddingOracle oracle(8, 1);
    MiningConfig cfg;
    cfg.prompts = {"a photo of a graphic"};
    cfg.keep_fraction = 0.01;
    CHECK(retrieve_candidates(corpus, cfg, oracle).size() == 2);  // ceil(1.5)
}

TEST_CASE("retrieval validates config and corpus") {
    test::TempDir tmp("minebad");
    write_corpus_dir(tmp.path() / "corpus", {});
    const auto corpus = CorpusReader::open(tmp.path() / "corpus");
    const HashEmbeddingOracle oracle(8, 1);
    MiningConfig cfg;
    cfg.prompts = {"p"};
    CHECK_THROWS_WITH_AS(retrieve_candidates(corpus, cfg, oracle),
                         doctest::Contains("empty corpus"), Error);

    cfg.prompts.clear();
    CHECK_THROWS_AS(validate_mining_config(cfg), Error);
    cfg.prompts = {"p"};
    cfg.keep_fraction = 0.0;
    CHECK_THROWS_AS(validate_mining_config(cfg), Error);
    cfg.keep_fraction = 1.5;
    CHECK_THROWS_AS(validate_mining_config(cfg), Error);

    const auto synthetic = make_synthetic_oracle(
        SyntheticOracleSpec{{}, test::world_colors(), false});
    test::TempDir tmp2("minebad2");
    write_corpus_dir(tmp2.path() / "c", {{"a.ppm", test::class_image(0, 8)}});
    const auto corpus2 = CorpusReader::open(tmp2.path() / "c");
    MiningConfig cfg2;
    cfg2.prompts = {"p"};
    CHECK_THROWS_WITH_AS(retrieve_candidates(corpus2, cfg2, *synthetic),
                         doctest::Contains("embeddings"), Error);
}

TEST_CASE("retrieval is invariant to corpus ordering except among exact ties") {
    test::TempDir tmp_a("orderA");
    test::TempDir tmp_b("orderB");
    Rng rng(77);
    std::vector<Image> images;
    for (int i = 0; i < 6; ++i) images.push_back(test::random_image(10, 10, rng));
    // Same content, different filenames -> different stream order.
    std::vector<std::pair<std::string, Image>> a_items, b_items;
    for (int i = 0; i < 6; ++i) {
        a_items.push_back({"a" + std::to_string(i) + ".ppm", images[static_cast<std::size_t>(i)]});
        b_items.push_back({"b" + std::to_string(5 - i) + ".ppm", images[static_cast<std::size_t>(i)]});
    }
    write_corpus_dir(tmp_a.path() / "c", a_items);
    write_corpus_dir(tmp_b.path() / "c", b_items);
    const HashEmbeddingOracle oracle(16, 9);
    MiningConfig cfg;
    cfg.prompts = {"graphic"};
    cfg.keep_fraction = 0.5;
    const auto keep_a = retrieve_candidates(CorpusReader::open(tmp_a.path() / "c"), cfg, oracle);
    const auto keep_b = retrieve_candidates(CorpusReader::open(tmp_b.path() / "c"), cfg, oracle);
    REQUIRE(keep_a.size() == keep_b.size());
    for (std::size_t i = 0; i < keep_a.size(); ++i) {
        // Hash embeddings make exact similarity ties measure-zero; content must agree.
        CHECK(keep_a[i].record.image == keep_b[i].record.image);
    }
}

TEST_CASE("embedding cache avoids re-embedding unchanged content") {
    test::TempDir tmp("cache");
    Rng rng(10);
    std::vector<std::pair<std::string, Image>> items;
    for (int i = 0; i < 4; ++i) {
        items.push_back({"i" + std::to_string(i) + ".ppm", test::random_image(8, 8, rng)});
    }
    write_corpus_dir(tmp.path() / "corpus", items);
    const auto corpus = CorpusReader::open(tmp.path() / "corpus");
    const auto counting =
        std::make_shared<test::CountingOracle>(std::make_shared<HashEmbeddingOracle>(8, 3));
    MiningConfig cfg;
    cfg.prompts = {"graphic"};
    cfg.keep_fraction = 1.0;
    const EmbeddingCache cache(tmp.path() / "embcache");

    const auto first = retrieve_candidates(corpus, cfg, *counting, cache);
    CHECK(counting->embedded_images == 4);
    const auto second = retrieve_candidates(corpus, cfg, *counting, cache);
    CHECK(counting->embedded_images == 4);  // all hits
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].record.id == second[i].record.id);
        CHECK(first[i].similarity == second[i].similarity);
    }
}

TEST_CASE("tar corpora stream identically to directories") {
    test::TempDir tmp("tar");
    Rng rng(6);
    const Image img0 = test::random_image(9, 9, rng);
    const Image img1 = test::random_image(9, 9, rng);
    std::vector<TarEntry> entries;
    entries.push_back({"x0.ppm", encode_ppm(img0)});
    entries.push_back({"x0.txt", "caption zero"});
    entries.push_back({"x1.ppm", encode_ppm(img1)});
    write_tar(tmp.path() / "shard.tar", entries);
    const auto corpus = CorpusReader::open(tmp.path() / "shard.tar");
    REQUIRE(corpus.size() == 2);
    CHECK(corpus.record(0).id == "x0.ppm");
    CHECK(corpus.record(0).caption == "caption zero");
    CHECK(corpus.record(0).image == img0);
    CHECK(corpus.record(1).caption.empty());
}

TEST_CASE("categorize: partition into the three artifact sets") {
    const GlyphTextDetector detector;
    Rng rng(3);

    const Image plain_logo = test::checker_patch(20, Rgb{200, 30, 30}, Rgb{30, 30, 200});
    Image text_logo = Image::filled(80, 30, Rgb{255, 255, 255});
    test::paste(text_logo, render_text_artifact("Japan Cloud", TextStyle{1}), 5, 5);

    std::vector<RetrievedCandidate> candidates;
    candidates.push_back(candidate("c0", plain_logo, 0.9));
    candidates.push_back(candidate("c1", text_logo, 0.8));

    const auto result = categorize(candidates, {"Japan", "Brazil"}, &detector);
    CHECK_FALSE(result.degraded_ocr);
    REQUIRE(result.graphics_no_text.size() == 1);
    CHECK(result.graphics_no_text[0].provenance.source_id == "c0");
    REQUIRE(result.graphics_text.size() == 1);
    CHECK(result.graphics_text[0].detected_text == std::vector<std::string>{"Japan Cloud"});
    // "Japan Cloud" is not an exact class match, so it stays a text artifact.
    REQUIRE(result.text.size() == 1);
    CHECK(result.text[0].text == "Japan Cloud");
    CHECK(result.text[0].category == ArtifactCategory::text);

    // Partition: each candidate appears in exactly one graphics set.
    std::set<std::string> graphics_sources;
    for (const auto& a : result.graphics_text) graphics_sources.insert(a.provenance.source_id);
    for (const auto& a : result.graphics_no_text) graphics_sources.insert(a.provenance.source_id);
    CHECK(graphics_sources == std::set<std::string>{"c0", "c1"});
}

TEST_CASE("class-name filter drops exact matches (typographic-attack guard)") {
    const GlyphTextDetector detector;

    // A standalone token exactly matching a class name is filtered.
    Image token_img = Image::filled(60, 24, Rgb{255, 255, 255});
    test::paste(token_img, render_text_artifact("Japan", TextStyle{1}), 4, 4);
    // A near-miss ("senors" for class "Senior") survives.
    Image near_miss = Image::filled(60, 24, Rgb{255, 255, 255});
    test::paste(near_miss, render_text_artifact("senors", TextStyle{1}), 4, 4);
    // Case-insensitive: "senior" under class "Senior" is filtered.
    Image exact_ci = Image::filled(60, 24, Rgb{255, 255, 255});
    test::paste(exact_ci, render_text_artifact("senior", TextStyle{1}), 4, 4);

    std::vector<RetrievedCandidate> candidates;
    candidates.push_back(candidate("tok", token_img));
    candidates.push_back(candidate("near", near_miss));
    candidates.push_back(candidate("ci", exact_ci));

    const auto result = categorize(candidates, {"Japan", "Senior"}, &detector);

    // Filter soundness: no text artifact equals a class name case-insensitively.
    for (const auto& a : result.text) {
        CHECK_FALSE(matches_class_name(a.text, {"Japan", "Senior"}));
    }
    REQUIRE(result.text.size() == 1);
    CHECK(result.text[0].text == "senors");

    // Graphics carrying only class-name text are dropped entirely.
    std::set<std::string> graphics_sources;
    for (const auto& a : result.graphics_text) graphics_sources.insert(a.provenance.source_id);
    CHECK(graphics_sources == std::set<std::string>{"near"});
    CHECK(result.graphics_no_text.empty());
}

TEST_CASE("degraded mode: no detector sends everything to graphics-no-text, flagged") {
    Rng rng(5);
    std::vector<RetrievedCandidate> candidates;
    candidates.push_back(candidate("a", test::random_image(16, 16, rng)));
    Image with_text = Image::filled(60, 24, Rgb{255, 255, 255});
    test::paste(with_text, render_text_artifact("HELLO", TextStyle{1}), 4, 4);
    candidates.push_back(candidate("b", with_text));

    const auto result = categorize(candidates, {"cat"}, nullptr);
    CHECK(result.degraded_ocr);
    CHECK(result.text.empty());
    CHECK(result.graphics_text.empty());
    CHECK(result.graphics_no_text.size() == 2);
}

TEST_CASE("duplicate detected strings yield one text artifact") {
    const GlyphTextDetector detector;
    Image one = Image::filled(60, 24, Rgb{255, 255, 255});
    test::paste(one, render_text_artifact("SALE", TextStyle{1}), 4, 4);
    Image two = Image::filled(70, 30, Rgb{255, 255, 255});
    test::paste(two, render_text_artifact("SALE", TextStyle{1}), 10, 8);

    std::vector<RetrievedCandidate> candidates;
    candidates.push_back(candidate("one", one));
    candidates.push_back(candidate("two", two));
    const auto result = categorize(candidates, {}, &detector);
    CHECK(result.text.size() == 1);
    CHECK(result.graphics_text.size() == 2);
}

TEST_CASE("mining result serialization round trip") {
    const GlyphTextDetector detector;
    Image img = Image::filled(60, 24, Rgb{255, 255, 255});
    test::paste(img, render_text_artifact("LOGO", TextStyle{1}), 4, 4);
    std::vector<RetrievedCandidate> candidates;
    candidates.push_back(candidate("src", img, 0.7));
    const auto result = categorize(candidates, {}, &detector);
    const json j = result;
    const auto back = j.get<MiningResult>();
    CHECK(back.text.size() == result.text.size());
    CHECK(back.graphics_text.size() == result.graphics_text.size());
    CHECK(back.graphics_text[0].patch == result.graphics_text[0].patch);
    CHECK(back.degraded_ocr == result.degraded_ocr);
}
