#pragma once
// HTTP adapters for real inference backends. A sidecar server (any runtime
// that can embed, generate, caption, or run OCR) speaks a small JSON protocol:
//
//   GET  /v1/info          -> {"identity": str, "logit_scale": num?}
//   POST /v1/embed_images  {"images":[{"pam_b64":str},...]} -> {"embeddings":[[...],...]}
//   POST /v1/embed_texts   {"texts":[str,...]}              -> {"embeddings":[[...],...]}
//   POST /v1/generate      {"image":{"pam_b64":str},"prompt":str} -> {"text":str}
//   POST /v1/caption       {"image":{"pam_b64":str}}        -> {"text":str}
//   POST /v1/ocr           {"image":{"pam_b64":str}}        -> {"spans":[TextSpan,...]}
//
// Adapters serialize access to the connection; callers may fan out threads.

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "httplib.h"

#include "webart/common.hpp"
#include "webart/mitigation.hpp"
#include "webart/ocr.hpp"
#include "webart/oracle.hpp"
#include "webart/serialize.hpp"

namespace webart {

struct RemoteConfig {
    std::string endpoint;  // e.g. http://127.0.0.1:8901
    std::string identity;
    int timeout_s = 120;
    std::size_t batch_size = 16;
    std::string device;  // hint forwarded to the server, informational
};

class RemoteClient {
public:
    explicit RemoteClient(RemoteConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.endpoint.empty()) fail(ErrorKind::validation, "remote adapter: empty endpoint");
    }

    const RemoteConfig& config() const { return cfg_; }

    json post(const std::string& path, const json& body) const {
        std::lock_guard<std::mutex> lock(mutex_);
        httplib::Client client(cfg_.endpoint);
        client.set_connection_timeout(cfg_.timeout_s, 0);
        client.set_read_timeout(cfg_.timeout_s, 0);
        const auto res = client.Post(path, body.dump(), "application/json");
        if (!res) {
            fail(ErrorKind::oracle, "remote adapter: cannot reach " + cfg_.endpoint + path);
        }
        if (res->status != 200) {
            fail(ErrorKind::oracle, "remote adapter: " + path + " returned HTTP " +
                                        std::to_string(res->status));
        }
        json j = json::parse(res->body, nullptr, false);
        if (j.is_discarded()) {
            fail(ErrorKind::oracle, "remote adapter: " + path + " returned malformed JSON");
        }
        return j;
    }

    std::optional<json> try_get(const std::string& path) const {
        std::lock_guard<std::mutex> lock(mutex_);
        httplib::Client client(cfg_.endpoint);
        client.set_connection_timeout(2, 0);
        client.set_read_timeout(cfg_.timeout_s, 0);
        const auto res = client.Get(path);
        if (!res || res->status != 200) return std::nullopt;
        json j = json::parse(res->body, nullptr, false);
        if (j.is_discarded()) return std::nullopt;
        return j;
    }

private:
    RemoteConfig cfg_;
    mutable std::mutex mutex_;
};

inline json image_wire(const Image& img) {
    return json{{"pam_b64", base64_encode(encode_pam(img))}};
}

// Zero-shot contrastive adapter: the server embeds, the adapter scores with
// softmax over scaled cosine similarities.
class RemoteContrastiveOracle final : public ClassifierOracle {
public:
    RemoteContrastiveOracle(RemoteConfig cfg, std::optional<double> logit_scale = std::nullopt)
        : client_(std::move(cfg)) {
        if (logit_scale) {
            logit_scale_ = *logit_scale;
        } else if (auto info = client_.try_get("/v1/info")) {
            // Checkpoint's learned scale when the server reports one.
            if (info->contains("logit_scale")) logit_scale_ = info->at("logit_scale").get<double>();
        }
    }

    OracleDescriptor descriptor() const override {
        return OracleDescriptor{OracleKind::contrastive, client_.config().identity};
    }

    bool has_embeddings() const override { return true; }

    std::vector<Embedding> embed_images(const std::vector<Image>& images) const override {
        std::vector<Embedding> out;
        out.reserve(images.size());
        const std::size_t chunk = std::max<std::size_t>(1, client_.config().batch_size);
        for (std::size_t start = 0; start < images.size(); start += chunk) {
            json batch = json::array();
            for (std::size_t i = start; i < std::min(images.size(), start + chunk); ++i) {
                batch.push_back(image_wire(images[i]));
            }
            const json reply = client_.post("/v1/embed_images", json{{"images", batch}});
            for (const auto& e : reply.at("embeddings")) {
                Embedding v = e.get<Embedding>();
                l2_normalize(v);
                out.push_back(std::move(v));
            }
        }
        if (out.size() != images.size()) {
            fail(ErrorKind::oracle, "remote adapter: embedding count mismatch");
        }
        return out;
    }

    std::vector<Embedding> embed_texts(const std::vector<std::string>& texts) const override {
        const json reply = client_.post("/v1/embed_texts", json{{"texts", texts}});
        std::vector<Embedding> out;
        for (const auto& e : reply.at("embeddings")) {
            Embedding v = e.get<Embedding>();
            l2_normalize(v);
            out.push_back(std::move(v));
        }
        if (out.size() != texts.size()) {
            fail(ErrorKind::oracle, "remote adapter: embedding count mismatch");
        }
        return out;
    }

    std::vector<Prediction> classify(const std::vector<Image>& images,
                                     const ClassPromptSet& prompts) const override {
        const auto prompt_embeddings = embed_texts(prompts.prompts);
        const auto image_embeddings = embed_images(images);
        std::vector<Prediction> out;
        out.reserve(images.size());
        for (const auto& e : image_embeddings) {
            out.push_back(contrastive_prediction(e, prompt_embeddings, logit_scale_));
        }
        return out;
    }

    double logit_scale() const { return logit_scale_; }

private:
    RemoteClient client_;
    double logit_scale_ = 100.0;
};

// Maps a free-form answer onto a class: case-insensitive exact name match,
// then unique-substring fallback. -1 when neither applies.
inline int parse_class_answer(const std::string& answer, const std::vector<std::string>& names) {
    const std::string probe = to_lower(trim(answer));
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (probe == to_lower(trim(names[i]))) return static_cast<int>(i);
    }
    int found = -1;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (contains_ci(probe, names[i])) {
            if (found >= 0) return -1;  // ambiguous
            found = static_cast<int>(i);
        }
    }
    return found;
}

// Generative VLM adapter: asks a closed-form question per image and parses
// the textual answer. One constrained retry; after that the sample is
// reported unparseable and excluded (and counted) by callers.
class RemoteGenerativeOracle final : public ClassifierOracle {
public:
    explicit RemoteGenerativeOracle(RemoteConfig cfg) : client_(std::move(cfg)) {}

    OracleDescriptor descriptor() const override {
        return OracleDescriptor{OracleKind::generative, client_.config().identity};
    }

    std::vector<Prediction> classify(const std::vector<Image>& images,
                                     const ClassPromptSet& prompts) const override {
        const auto& names = prompts.answer_names();
        std::string name_list;
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i) name_list += ", ";
            name_list += names[i];
        }
        std::string question = prompts.instruction;
        const std::size_t slot = question.find("{names}");
        if (slot != std::string::npos) question.replace(slot, 7, name_list);

        std::vector<Prediction> out;
        out.reserve(images.size());
        for (const auto& img : images) {
            int cls = ask(img, question, names);
            if (cls < 0) {
                cls = ask(img, question + " Respond with only the class name and nothing else.",
                          names);
            }
            Prediction p;
            p.scores.assign(names.size(), 0.0);
            if (cls < 0) {
                p.unparseable = true;
                p.argmax = 0;
            } else {
                p.scores[static_cast<std::size_t>(cls)] = 1.0;
                p.argmax = cls;
            }
            out.push_back(std::move(p));
        }
        return out;
    }

private:
    int ask(const Image& img, const std::string& question,
            const std::vector<std::string>& names) const {
        const json reply =
            client_.post("/v1/generate", json{{"image", image_wire(img)}, {"prompt", question}});
        return parse_class_answer(reply.at("text").get<std::string>(), names);
    }

    RemoteClient client_;
};

class RemoteCaptioner final : public Captioner {
public:
    explicit RemoteCaptioner(RemoteConfig cfg) : client_(std::move(cfg)) {}

    bool available() const override { return true; }

    std::string caption(const Image& image) const override {
        const json reply = client_.post("/v1/caption", json{{"image", image_wire(image)}});
        return reply.at("text").get<std::string>();
    }

private:
    RemoteClient client_;
};

class RemoteTextDetector final : public TextDetector {
public:
    explicit RemoteTextDetector(RemoteConfig cfg) : client_(std::move(cfg)) {}

    bool available() const override { return client_.try_get("/v1/info").has_value(); }

    std::vector<TextSpan> detect(const Image& image) const override {
        const json reply = client_.post("/v1/ocr", json{{"image", image_wire(image)}});
        return reply.at("spans").get<std::vector<TextSpan>>();
    }

private:
    RemoteClient client_;
};

}  // namespace webart
