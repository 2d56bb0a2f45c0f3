#pragma once
// Builds oracles, captioners, and text detectors from structured config, so
// the CLI and pipeline can name any backend in one JSON block.

#include <memory>
#include <string>

#include "webart/common.hpp"
#include "webart/mitigation.hpp"
#include "webart/ocr.hpp"
#include "webart/oracle.hpp"
#include "webart/remote.hpp"
#include "webart/serialize.hpp"
#include "webart/synthetic.hpp"

namespace webart {

inline void to_json(json& j, const NormRegion& r) {
    j = json{{"u0", r.u0}, {"v0", r.v0}, {"u1", r.u1}, {"v1", r.v1}};
}

inline void from_json(const json& j, NormRegion& r) {
    r.u0 = j.at("u0").get<double>();
    r.v0 = j.at("v0").get<double>();
    r.u1 = j.at("u1").get<double>();
    r.v1 = j.at("v1").get<double>();
}

// Trigger forms: {"text": str, "scale": int} renders the string;
// {"pattern": {"pam_b64": ...}} is an explicit patch; {"solid": [r,g,b],
// "width": w, "height": h} is a flat color block.
inline void from_json(const json& j, TriggerRule& t) {
    t = TriggerRule{};
    t.class_id = j.at("class").get<int>();
    if (j.contains("text")) {
        t.text = j.at("text").get<std::string>();
        const int scale = j.value("scale", 2);
        t.pattern = render_text_artifact(t.text, TextStyle{scale});
    } else if (j.contains("pattern")) {
        t.pattern = j.at("pattern").get<Image>();
    } else if (j.contains("solid")) {
        const Rgb color = j.at("solid").get<Rgb>();
        t.pattern = Image::filled(j.value("width", 8), j.value("height", 8), color);
    } else {
        fail(ErrorKind::parse, "synthetic trigger needs one of: text, pattern, solid");
    }
    if (j.contains("source_text")) t.text = j.at("source_text").get<std::string>();
    if (j.contains("region")) t.region = j.at("region").get<NormRegion>();
}

inline void to_json(json& j, const TriggerRule& t) {
    j = json{{"class", t.class_id}, {"pattern", t.pattern}};
    if (!t.text.empty()) j["source_text"] = t.text;
    if (t.region) j["region"] = *t.region;
}

inline void from_json(const json& j, SyntheticOracleSpec& s) {
    s = SyntheticOracleSpec{};
    s.base_colors = j.at("base_colors").get<std::vector<Rgb>>();
    if (j.contains("triggers")) s.triggers = j.at("triggers").get<std::vector<TriggerRule>>();
    s.prompt_suppression = j.value("prompt_suppression", false);
}

inline void to_json(json& j, const SyntheticOracleSpec& s) {
    j = json{{"base_colors", s.base_colors},
             {"triggers", s.triggers},
             {"prompt_suppression", s.prompt_suppression}};
}

inline RemoteConfig remote_config_from_json(const json& j) {
    RemoteConfig cfg;
    cfg.endpoint = j.at("endpoint").get<std::string>();
    cfg.identity = j.value("identity", cfg.endpoint);
    cfg.timeout_s = j.value("timeout_s", 120);
    cfg.batch_size = j.value("batch_size", std::size_t{16});
    cfg.device = j.value("device", std::string{});
    return cfg;
}

// kind: synthetic | hash-embedding | contrastive | generative
inline std::shared_ptr<ClassifierOracle> make_oracle(const json& cfg) {
    const std::string kind = cfg.at("kind").get<std::string>();
    if (kind == "synthetic") {
        return make_synthetic_oracle(cfg.at("spec").get<SyntheticOracleSpec>());
    }
    if (kind == "hash-embedding") {
        return std::make_shared<HashEmbeddingOracle>(cfg.value("dim", 32),
                                                     cfg.value("seed", std::uint64_t{0}),
                                                     cfg.value("logit_scale", 100.0));
    }
    if (kind == "contrastive") {
        std::optional<double> scale;
        if (cfg.contains("logit_scale")) scale = cfg.at("logit_scale").get<double>();
        return std::make_shared<RemoteContrastiveOracle>(remote_config_from_json(cfg), scale);
    }
    if (kind == "generative") {
        return std::make_shared<RemoteGenerativeOracle>(remote_config_from_json(cfg));
    }
    fail(ErrorKind::validation, "unknown oracle kind '" + kind + "'");
}

inline std::shared_ptr<ClassifierOracle> load_oracle(const std::filesystem::path& path) {
    return make_oracle(parse_json_file(path));
}

// kind: color | remote
inline std::shared_ptr<Captioner> make_captioner(const json& cfg) {
    const std::string kind = cfg.at("kind").get<std::string>();
    if (kind == "color") return std::make_shared<ColorCaptioner>();
    if (kind == "remote") return std::make_shared<RemoteCaptioner>(remote_config_from_json(cfg));
    fail(ErrorKind::validation, "unknown captioner kind '" + kind + "'");
}

// kind: builtin | remote | none
inline std::shared_ptr<TextDetector> make_text_detector(const json& cfg) {
    const std::string kind = cfg.at("kind").get<std::string>();
    if (kind == "builtin") return std::make_shared<GlyphTextDetector>();
    if (kind == "remote") return std::make_shared<RemoteTextDetector>(remote_config_from_json(cfg));
    if (kind == "none") return nullptr;
    fail(ErrorKind::validation, "unknown text detector kind '" + kind + "'");
}

}  // namespace webart
