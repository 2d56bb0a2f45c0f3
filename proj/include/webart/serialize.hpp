#pragma once
// JSON bindings for the value types that cross file and wire boundaries.
// Pixel payloads travel as base64 PAM so round-trips are byte-identical.

#include <optional>

#include "json.hpp"

#include "webart/artifact.hpp"
#include "webart/common.hpp"
#include "webart/image.hpp"
#include "webart/image_io.hpp"
#include "webart/imaging.hpp"
#include "webart/manifest.hpp"
#include "webart/ocr.hpp"
#include "webart/oracle.hpp"
#include "webart/search.hpp"

namespace webart {

using json = nlohmann::json;

inline void to_json(json& j, const Image& img) {
    j = json{{"pam_b64", base64_encode(encode_pam(img))}};
}

inline void from_json(const json& j, Image& img) {
    img = decode_pnm(base64_decode(j.at("pam_b64").get<std::string>()));
}

inline void to_json(json& j, const Rgb& c) { j = json::array({c.r, c.g, c.b}); }

inline void from_json(const json& j, Rgb& c) {
    c.r = j.at(0).get<std::uint8_t>();
    c.g = j.at(1).get<std::uint8_t>();
    c.b = j.at(2).get<std::uint8_t>();
}

inline void to_json(json& j, const GridCell& c) { j = json{{"row", c.row}, {"col", c.col}}; }

inline void from_json(const json& j, GridCell& c) {
    c.row = j.at("row").get<int>();
    c.col = j.at("col").get<int>();
}

inline void to_json(json& j, const PlacementGrid& g) {
    j = json{{"rows", g.rows}, {"cols", g.cols}};
}

inline void from_json(const json& j, PlacementGrid& g) {
    g.rows = j.at("rows").get<int>();
    g.cols = j.at("cols").get<int>();
}

inline void to_json(json& j, const Placement& p) {
    j = json{{"u", p.u}, {"v", p.v}, {"shrink_factor", p.shrink_factor}, {"opacity", p.opacity}};
}

inline void from_json(const json& j, Placement& p) {
    p.u = j.at("u").get<double>();
    p.v = j.at("v").get<double>();
    p.shrink_factor = j.at("shrink_factor").get<double>();
    p.opacity = j.at("opacity").get<double>();
}

inline void to_json(json& j, const CellPlacement& p) {
    j = json{{"cell", p.cell}, {"shrink_factor", p.shrink_factor}, {"opacity", p.opacity}};
}

inline void from_json(const json& j, CellPlacement& p) {
    p.cell = j.at("cell").get<GridCell>();
    p.shrink_factor = j.at("shrink_factor").get<double>();
    p.opacity = j.at("opacity").get<double>();
}

inline void to_json(json& j, const PixelRegion& r) {
    j = json{{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}};
}

inline void from_json(const json& j, PixelRegion& r) {
    r.x = j.at("x").get<int>();
    r.y = j.at("y").get<int>();
    r.w = j.at("w").get<int>();
    r.h = j.at("h").get<int>();
}

inline void to_json(json& j, const TextSpan& s) {
    j = json{{"text", s.text}, {"box", s.box}, {"confidence", s.confidence}};
}

inline void from_json(const json& j, TextSpan& s) {
    s.text = j.at("text").get<std::string>();
    s.box = j.at("box").get<PixelRegion>();
    s.confidence = j.at("confidence").get<double>();
}

inline void to_json(json& j, const Provenance& p) {
    j = json{{"source_id", p.source_id}, {"similarity", p.similarity}};
}

inline void from_json(const json& j, Provenance& p) {
    p.source_id = j.at("source_id").get<std::string>();
    p.similarity = j.at("similarity").get<double>();
}

inline void to_json(json& j, const Artifact& a) {
    j = json{{"id", a.id},
             {"category", category_name(a.category)},
             {"detected_text", a.detected_text},
             {"provenance", a.provenance}};
    if (a.is_text()) {
        j["text"] = a.text;
    } else {
        j["patch"] = a.patch;
    }
}

inline void from_json(const json& j, Artifact& a) {
    a = Artifact{};
    a.id = j.at("id").get<std::string>();
    a.category = parse_category(j.at("category").get<std::string>());
    a.detected_text = j.at("detected_text").get<std::vector<std::string>>();
    a.provenance = j.at("provenance").get<Provenance>();
    if (j.contains("text")) a.text = j.at("text").get<std::string>();
    if (j.contains("patch")) a.patch = j.at("patch").get<Image>();
    validate_artifact(a);
}

inline void to_json(json& j, const PerSampleImpact& p) {
    j = json{{"sample_id", p.sample_id},
             {"placement", p.placement},
             {"predicted", p.predicted},
             {"failed", p.failed}};
}

inline void from_json(const json& j, PerSampleImpact& p) {
    p.sample_id = j.at("sample_id").get<std::string>();
    p.placement = j.at("placement").get<Placement>();
    p.predicted = j.at("predicted").get<int>();
    p.failed = j.at("failed").get<bool>();
}

inline void to_json(json& j, const ImpactRecord& r) {
    j = json{{"artifact_id", r.artifact_id}, {"target_class", r.target_class},
             {"n", r.n},                     {"hits", r.hits},
             {"score", r.score},             {"seed", r.seed},
             {"per_sample", r.per_sample}};
}

inline void from_json(const json& j, ImpactRecord& r) {
    r.artifact_id = j.at("artifact_id").get<std::string>();
    r.target_class = j.at("target_class").get<int>();
    r.n = j.at("n").get<int>();
    r.hits = j.at("hits").get<int>();
    r.score = j.at("score").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.per_sample = j.at("per_sample").get<std::vector<PerSampleImpact>>();
}

inline void to_json(json& j, const CellScore& c) {
    j = json{{"cell", c.cell}, {"n", c.n}, {"hits", c.hits},
             {"score", c.score}, {"skipped", c.skipped}};
}

inline void from_json(const json& j, CellScore& c) {
    c.cell = j.at("cell").get<GridCell>();
    c.n = j.at("n").get<int>();
    c.hits = j.at("hits").get<int>();
    c.score = j.at("score").get<double>();
    c.skipped = j.at("skipped").get<bool>();
}

inline void to_json(json& j, const PlacementSearchResult& r) {
    j = json{{"best", r.best}, {"cells", r.cells}};
}

inline void from_json(const json& j, PlacementSearchResult& r) {
    r.best = j.at("best").get<CellPlacement>();
    r.cells = j.at("cells").get<std::vector<CellScore>>();
}

inline void to_json(json& j, const ScoredArtifact& s) {
    j = json{{"artifact", s.artifact}, {"record", s.record}};
}

inline void from_json(const json& j, ScoredArtifact& s) {
    s.artifact = j.at("artifact").get<Artifact>();
    s.record = j.at("record").get<ImpactRecord>();
}

inline void to_json(json& j, const ClassLabel& c) { j = json{{"id", c.id}, {"name", c.name}}; }

inline void from_json(const json& j, ClassLabel& c) {
    c.id = j.at("id").get<int>();
    c.name = j.at("name").get<std::string>();
}

inline void to_json(json& j, const AttackComponent& c) {
    j = json{{"artifact", c.artifact}, {"placement", c.placement}};
}

inline void from_json(const json& j, AttackComponent& c) {
    c.artifact = j.at("artifact").get<Artifact>();
    c.placement = j.at("placement").get<CellPlacement>();
}

inline void to_json(json& j, const AttackSpec& a) {
    j = json{{"target_class", a.target_class}, {"grid", a.grid}, {"components", a.components}};
}

inline void from_json(const json& j, AttackSpec& a) {
    a.target_class = j.at("target_class").get<int>();
    a.grid = j.at("grid").get<PlacementGrid>();
    a.components = j.at("components").get<std::vector<AttackComponent>>();
    validate_attack(a);
}

inline json parse_json_file(const std::filesystem::path& path) {
    const std::string bytes = read_file_bytes(path);
    json j = json::parse(bytes, nullptr, false);
    if (j.is_discarded()) fail(ErrorKind::parse, "malformed JSON: " + path.string());
    return j;
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
    write_file_bytes(path, j.dump(2) + "\n");
}

}  // namespace webart
