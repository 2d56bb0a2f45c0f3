#include "doctest.h"

#include <atomic>
#include <thread>

#include "httplib.h"

#include "webart/oracle_config.hpp"
#include "webart/remote.hpp"

#include "support.hpp"

using namespace webart;

namespace {

// Deterministic mock embedding: a few cheap features of the byte stream.
Embedding feature_embedding(const std::string& bytes) {
    Embedding v(4, 0.0);
    for (unsigned char c : bytes) {
        v[0] += c % 7;
        v[1] += c % 11;
        v[2] += c % 13;
        v[3] += 1.0;
    }
    l2_normalize(v);
    return v;
}

struct MockServer {
    httplib::Server server;
    std::thread thread;
    std::string endpoint;
    std::atomic<int> generate_calls{0};

    MockServer() {
        server.Get("/v1/info", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"identity":"mock","logit_scale":50.0})", "application/json");
        });
        server.Post("/v1/embed_texts", [](const httplib::Request& req, httplib::Response& res) {
            const json body = json::parse(req.body);
            json embeddings = json::array();
            for (const auto& t : body.at("texts")) {
                embeddings.push_back(feature_embedding(t.get<std::string>()));
            }
            res.set_content(json{{"embeddings", embeddings}}.dump(), "application/json");
        });
        server.Post("/v1/embed_images", [](const httplib::Request& req, httplib::Response& res) {
            const json body = json::parse(req.body);
            json embeddings = json::array();
            for (const auto& img : body.at("images")) {
                embeddings.push_back(
                    feature_embedding(base64_decode(img.at("pam_b64").get<std::string>())));
            }
            res.set_content(json{{"embeddings", embeddings}}.dump(), "application/json");
        });
        server.Post("/v1/caption", [](const httplib::Request& req, httplib::Response& res) {
            const json body = json::parse(req.body);
            const Image img = body.at("image").get<Image>();
            res.set_content(
                json{{"text", "a patch of " + std::to_string(img.width) + " pixels wide"}}.dump(),
                "application/json");
        });
        server.Post("/v1/ocr", [](const httplib::Request&, httplib::Response& res) {
            const TextSpan span{"MOCK", PixelRegion{1, 2, 12, 7}, 0.9};
            res.set_content(json{{"spans", json::array({span})}}.dump(), "application/json");
        });
        const int port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        endpoint = "http://127.0.0.1:" + std::to_string(port);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~MockServer() {
        server.stop();
        thread.join();
    }

    RemoteConfig config() const {
        RemoteConfig cfg;
        cfg.endpoint = endpoint;
        cfg.identity = "mock";
        cfg.timeout_s = 10;
        cfg.batch_size = 2;
        return cfg;
    }
};

}  // namespace

TEST_CASE("remote contrastive adapter matches local cosine math") {
    MockServer mock;
    const RemoteContrastiveOracle oracle(mock.config());
    CHECK(oracle.logit_scale() == 50.0);  // picked up from /v1/info
    CHECK(oracle.has_embeddings());
    CHECK(oracle.descriptor().kind == OracleKind::contrastive);

    Rng rng(12);
    std::vector<Image> images;
    for (int i = 0; i < 5; ++i) images.push_back(test::random_image(10, 10, rng));
    ClassPromptSet prompts;
    prompts.prompts = {"a photo of a cat", "a photo of a dog", "a photo of a bird"};

    const auto preds = oracle.classify(images, prompts);
    REQUIRE(preds.size() == images.size());

    // Independent recomputation through the same wire format.
    for (std::size_t i = 0; i < images.size(); ++i) {
        const Embedding img_emb = feature_embedding(encode_pam(images[i]));
        std::vector<double> logits;
        for (const auto& p : prompts.prompts) {
            logits.push_back(50.0 * cosine(img_emb, feature_embedding(p)));
        }
        const auto expect = softmax(logits);
        REQUIRE(preds[i].scores.size() == expect.size());
        for (std::size_t c = 0; c < expect.size(); ++c) {
            CHECK(preds[i].scores[c] == doctest::Approx(expect[c]).epsilon(1e-9));
        }
        CHECK(preds[i].argmax == argmax_class(expect));
    }

    // embeddings arrive unit-normalized even in chunked batches
    const auto embs = oracle.embed_images(images);
    REQUIRE(embs.size() == 5);
    for (const auto& e : embs) CHECK(std::abs(std::sqrt(dot(e, e)) - 1.0) < 1e-9);
}

TEST_CASE("config override pins the logit scale") {
    MockServer mock;
    const RemoteContrastiveOracle oracle(mock.config(), 123.0);
    CHECK(oracle.logit_scale() == 123.0);
}

TEST_CASE("generative answer parsing: exact, substring, retry, unparseable") {
    MockServer mock;

    // Answer script keyed by the retry marker in the prompt.
    std::atomic<int> mode{0};
    mock.server.Post("/v1/generate", [&](const httplib::Request& req, httplib::Response& res) {
        mock.generate_calls++;
        const json body = json::parse(req.body);
        const std::string prompt = body.at("prompt").get<std::string>();
        const bool retry = prompt.find("nothing else") != std::string::npos;
        std::string answer;
        switch (mode.load()) {
            case 0: answer = "Dog"; break;                          // exact (case-insensitive)
            case 1: answer = "it looks like a dog to me"; break;    // unique substring
            case 2: answer = retry ? "cat" : "hard to say"; break;  // needs the retry
            case 3: answer = "maybe a cat or a dog"; break;         // ambiguous forever
            default: answer = "";
        }
        res.set_content(json{{"text", answer}}.dump(), "application/json");
    });

    const RemoteGenerativeOracle oracle(mock.config());
    ClassPromptSet prompts;
    prompts.prompts = {"a photo of a cat", "a photo of a dog"};
    prompts.names = {"cat", "dog"};
    const Image img = test::class_image(0, 32);

    mode = 0;
    auto pred = oracle.classify({img}, prompts).at(0);
    CHECK_FALSE(pred.unparseable);
    CHECK(pred.argmax == 1);
    CHECK(pred.scores == std::vector<double>{0.0, 1.0});

    mode = 1;
    pred = oracle.classify({img}, prompts).at(0);
    CHECK(pred.argmax == 1);

    mode = 2;
    mock.generate_calls = 0;
    pred = oracle.classify({img}, prompts).at(0);
    CHECK(pred.argmax == 0);
    CHECK(mock.generate_calls == 2);  // one constrained retry

    mode = 3;
    mock.generate_calls = 0;
    pred = oracle.classify({img}, prompts).at(0);
    CHECK(pred.unparseable);
    CHECK(mock.generate_calls == 2);  // retried once, then gave up
}

TEST_CASE("generative adapter has no embedding support") {
    MockServer mock;
    const RemoteGenerativeOracle oracle(mock.config());
    CHECK_FALSE(oracle.has_embeddings());
    CHECK_THROWS_AS(oracle.embed_texts({"x"}), Error);
}

TEST_CASE("parse_class_answer rules") {
    const std::vector<std::string> names{"cat", "dog", "bird"};
    CHECK(parse_class_answer("CAT", names) == 0);
    CHECK(parse_class_answer("  dog \n", names) == 1);
    CHECK(parse_class_answer("i think it is a bird!", names) == 2);
    CHECK(parse_class_answer("either cat or dog", names) == -1);
    CHECK(parse_class_answer("zebra", names) == -1);
}

TEST_CASE("remote captioner and OCR adapters round the wire") {
    MockServer mock;
    const RemoteCaptioner captioner(mock.config());
    CHECK(captioner.caption(test::class_image(1, 40)) == "a patch of 40 pixels wide");

    const RemoteTextDetector detector(mock.config());
    CHECK(detector.available());
    const auto spans = detector.detect(test::class_image(0, 32));
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].text == "MOCK");
    CHECK(spans[0].confidence == 0.9);
    // threshold filter applies to remote spans too
    CHECK(detect_text(detector, test::class_image(0, 32), 0.95).empty());
}

TEST_CASE("unreachable endpoints surface as oracle errors") {
    RemoteConfig cfg;
    cfg.endpoint = "http://127.0.0.1:1";  // nothing listens there
    cfg.identity = "down";
    cfg.timeout_s = 1;
    const RemoteGenerativeOracle oracle(cfg);
    ClassPromptSet prompts;
    prompts.prompts = {"a", "b"};
    CHECK_THROWS_AS(oracle.classify({test::class_image(0, 32)}, prompts), Error);
}

TEST_CASE("make_oracle builds adapters from config blocks") {
    MockServer mock;
    const json contrastive_cfg = {{"kind", "contrastive"},
                                  {"endpoint", mock.endpoint},
                                  {"identity", "mock-clip"},
                                  {"timeout_s", 5}};
    const auto contrastive = make_oracle(contrastive_cfg);
    CHECK(contrastive->descriptor().identity == "mock-clip");
    CHECK(contrastive->has_embeddings());

    const json generative_cfg = {{"kind", "generative"},
                                 {"endpoint", mock.endpoint},
                                 {"identity", "mock-vlm"}};
    CHECK(make_oracle(generative_cfg)->descriptor().kind == OracleKind::generative);

    const json synthetic_cfg = {
        {"kind", "synthetic"},
        {"spec",
         {{"base_colors", json::array({json::array({220, 40, 40}), json::array({40, 220, 40})})},
          {"triggers", json::array({{{"class", 1}, {"text", "KID"}, {"scale", 2}}})}}}};
    const auto synthetic = make_oracle(synthetic_cfg);
    CHECK(synthetic->descriptor().kind == OracleKind::synthetic);

    const json hash_cfg = {{"kind", "hash-embedding"}, {"dim", 8}, {"seed", 3}};
    CHECK(make_oracle(hash_cfg)->has_embeddings());

    CHECK_THROWS_AS(make_oracle(json{{"kind", "quantum"}}), Error);
}

TEST_CASE("synthetic oracle spec JSON round trip keeps behavior") {
    SyntheticOracleSpec spec;
    spec.base_colors = test::world_colors();
    spec.triggers.push_back(make_text_trigger("BING", 2, 2));
    spec.prompt_suppression = true;
    const json j = spec;
    const auto back = j.get<SyntheticOracleSpec>();
    CHECK(back.base_colors == spec.base_colors);
    CHECK(back.prompt_suppression);
    REQUIRE(back.triggers.size() == 1);
    CHECK(back.triggers[0].pattern == spec.triggers[0].pattern);
    CHECK(back.triggers[0].class_id == 2);
}

TEST_CASE("text detector config factory") {
    CHECK(make_text_detector(json{{"kind", "builtin"}}) != nullptr);
    CHECK(make_text_detector(json{{"kind", "none"}}) == nullptr);
    CHECK_THROWS_AS(make_text_detector(json{{"kind", "x"}}), Error);
}
