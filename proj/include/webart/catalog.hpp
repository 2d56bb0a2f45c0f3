#pragma once
// On-disk catalog of mined artifacts per target class: per-category lists
// ranked by impact score, optionally carrying optimized placements.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "webart/common.hpp"
#include "webart/search.hpp"
#include "webart/serialize.hpp"

namespace webart {

inline constexpr const char* kCatalogSchema = "v1";

struct CatalogEntry {
    Artifact artifact;
    ImpactRecord record;
    std::optional<CellPlacement> best_placement;
    std::optional<std::vector<CellScore>> score_map;
};

struct ArtifactCatalog {
    ClassLabel target_class;
    PlacementGrid grid;
    std::uint64_t seed = 0;
    std::string oracle_identity;
    std::string split_used = "train";
    std::vector<CatalogEntry> text;
    std::vector<CatalogEntry> graphics_text;
    std::vector<CatalogEntry> graphics_no_text;

    std::vector<CatalogEntry>& category(ArtifactCategory c) {
        switch (c) {
            case ArtifactCategory::text: return text;
            case ArtifactCategory::graphics_text: return graphics_text;
            case ArtifactCategory::graphics_no_text: return graphics_no_text;
        }
        fail(ErrorKind::validation, "bad category");
    }

    const std::vector<CatalogEntry>& category(ArtifactCategory c) const {
        return const_cast<ArtifactCatalog*>(this)->category(c);
    }
};

inline bool catalog_order(const CatalogEntry& a, const CatalogEntry& b) {
    if (a.record.score != b.record.score) return a.record.score > b.record.score;
    return a.artifact.id < b.artifact.id;
}

inline void sort_catalog(ArtifactCatalog& cat) {
    for (auto* list : {&cat.text, &cat.graphics_text, &cat.graphics_no_text}) {
        std::stable_sort(list->begin(), list->end(), catalog_order);
    }
}

inline void validate_catalog(const ArtifactCatalog& cat) {
    for (const auto* list : {&cat.text, &cat.graphics_text, &cat.graphics_no_text}) {
        for (std::size_t i = 0; i < list->size(); ++i) {
            validate_artifact((*list)[i].artifact);
            if (i > 0 && catalog_order((*list)[i], (*list)[i - 1])) {
                fail(ErrorKind::validation, "catalog: category list not in ranked order");
            }
        }
    }
}

inline void to_json(json& j, const CatalogEntry& e) {
    j = json{{"artifact", e.artifact}, {"record", e.record}};
    if (e.best_placement) j["best_placement"] = *e.best_placement;
    if (e.score_map) j["score_map"] = *e.score_map;
}

inline void from_json(const json& j, CatalogEntry& e) {
    e.artifact = j.at("artifact").get<Artifact>();
    e.record = j.at("record").get<ImpactRecord>();
    if (j.contains("best_placement")) e.best_placement = j.at("best_placement").get<CellPlacement>();
    if (j.contains("score_map")) e.score_map = j.at("score_map").get<std::vector<CellScore>>();
}

inline void to_json(json& j, const ArtifactCatalog& cat) {
    j = json{{"schema", kCatalogSchema},
             {"target_class", cat.target_class},
             {"grid", cat.grid},
             {"seed", cat.seed},
             {"oracle_identity", cat.oracle_identity},
             {"split_used", cat.split_used},
             {"text", cat.text},
             {"graphics_text", cat.graphics_text},
             {"graphics_no_text", cat.graphics_no_text}};
}

inline void from_json(const json& j, ArtifactCatalog& cat) {
    const std::string schema = j.at("schema").get<std::string>();
    if (schema != kCatalogSchema) {
        fail(ErrorKind::parse, "catalog schema mismatch: expected " + std::string(kCatalogSchema) +
                                   ", found " + schema);
    }
    cat.target_class = j.at("target_class").get<ClassLabel>();
    cat.grid = j.at("grid").get<PlacementGrid>();
    cat.seed = j.at("seed").get<std::uint64_t>();
    cat.oracle_identity = j.at("oracle_identity").get<std::string>();
    cat.split_used = j.at("split_used").get<std::string>();
    cat.text = j.at("text").get<std::vector<CatalogEntry>>();
    cat.graphics_text = j.at("graphics_text").get<std::vector<CatalogEntry>>();
    cat.graphics_no_text = j.at("graphics_no_text").get<std::vector<CatalogEntry>>();
    validate_catalog(cat);
}

inline void save_catalog(const ArtifactCatalog& cat, const std::filesystem::path& path) {
    validate_catalog(cat);
    write_json_file(path, json(cat));
}

inline ArtifactCatalog load_catalog(const std::filesystem::path& path) {
    try {
        return parse_json_file(path).get<ArtifactCatalog>();
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        fail(ErrorKind::parse, "catalog '" + path.string() + "': " + e.what());
    }
}

}  // namespace webart
