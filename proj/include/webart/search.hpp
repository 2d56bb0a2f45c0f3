#pragma once
// Search stage: measure each artifact's pull toward a target class over
// opposing-class images (random placement), keep the top-s per category, then
// optimize placement over the grid and combine artifacts across categories.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "webart/artifact.hpp"
#include "webart/common.hpp"
#include "webart/imaging.hpp"
#include "webart/manifest.hpp"
#include "webart/oracle.hpp"

namespace webart {

struct PerSampleImpact {
    std::string sample_id;
    Placement placement;
    int predicted = -1;
    bool failed = false;  // oracle unparseable or placement did not fit
};

// Misclassification statistics for one (artifact, target class) pair.
struct ImpactRecord {
    std::string artifact_id;
    int target_class = 0;
    int n = 0;     // evaluated samples
    int hits = 0;  // predicted as target
    double score = 0.0;
    std::uint64_t seed = 0;
    std::vector<PerSampleImpact> per_sample;
};

struct ImpactConfig {
    PlacementGrid grid;
    double shrink_factor = 10.0;
    double opacity = 1.0;
    double max_failure_fraction = 0.10;  // abort above this
    TextStyle text_style;
};

// Random-placement impact score: one grid cell drawn per sample (seeded, all
// draws made up front), artifact composited, prediction compared to target.
inline ImpactRecord impact_score(const Artifact& artifact,
                                 const std::vector<ImageSample>& opposing,
                                 const ClassifierOracle& oracle, int target_class,
                                 const ClassPromptSet& prompts, std::uint64_t seed,
                                 const ImpactConfig& cfg = {}) {
    if (opposing.empty()) fail(ErrorKind::validation, "impact_score: empty opposing set");
    validate_artifact(artifact);
    const Image payload = artifact_payload(artifact, cfg.text_style);

    Rng rng(seed ^ fnv1a64("impact/" + artifact.id));
    std::vector<int> cells(opposing.size());
    for (auto& c : cells) c = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(cfg.grid.cell_count())));

    ImpactRecord rec;
    rec.artifact_id = artifact.id;
    rec.target_class = target_class;
    rec.seed = seed;

    std::vector<Image> modified;
    std::vector<std::size_t> modified_index;
    rec.per_sample.resize(opposing.size());
    for (std::size_t i = 0; i < opposing.size(); ++i) {
        auto& ps = rec.per_sample[i];
        ps.sample_id = opposing[i].source_path;
        const CellPlacement cp{cfg.grid.cell_at(cells[i]), cfg.shrink_factor, cfg.opacity};
        try {
            ps.placement = resolve_cell_placement(cfg.grid, cp, opposing[i].image.width,
                                                  opposing[i].image.height, payload.width,
                                                  payload.height);
        } catch (const Error&) {
            ps.failed = true;
            continue;
        }
        modified.push_back(composite(opposing[i].image, payload, ps.placement));
        modified_index.push_back(i);
    }

    if (!modified.empty()) {
        const auto preds = classify_batch(oracle, modified, prompts);
        for (std::size_t k = 0; k < preds.size(); ++k) {
            auto& ps = rec.per_sample[modified_index[k]];
            if (preds[k].unparseable) {
                ps.failed = true;
                continue;
            }
            ps.predicted = preds[k].argmax;
        }
    }

    int failures = 0;
    for (const auto& ps : rec.per_sample) {
        if (ps.failed) {
            ++failures;
            continue;
        }
        ++rec.n;
        if (ps.predicted == target_class) ++rec.hits;
    }
    if (failures > cfg.max_failure_fraction * static_cast<double>(opposing.size())) {
        fail(ErrorKind::oracle, "impact_score: " + std::to_string(failures) + "/" +
                                    std::to_string(opposing.size()) +
                                    " samples failed for artifact '" + artifact.id + "'");
    }
    if (rec.n == 0) fail(ErrorKind::oracle, "impact_score: no evaluable samples");
    rec.score = static_cast<double>(rec.hits) / rec.n;
    return rec;
}

struct ScoredArtifact {
    Artifact artifact;
    ImpactRecord record;
};

inline bool impact_order(const ScoredArtifact& a, const ScoredArtifact& b) {
    if (a.record.score != b.record.score) return a.record.score > b.record.score;
    return a.artifact.id < b.artifact.id;
}

struct RankedSelection {
    std::vector<ScoredArtifact> text;
    std::vector<ScoredArtifact> graphics_text;
    std::vector<ScoredArtifact> graphics_no_text;

    const std::vector<ScoredArtifact>& category(ArtifactCategory c) const {
        switch (c) {
            case ArtifactCategory::text: return text;
            case ArtifactCategory::graphics_text: return graphics_text;
            case ArtifactCategory::graphics_no_text: return graphics_no_text;
        }
        fail(ErrorKind::validation, "bad category");
    }
};

// Per-category top-s by score descending, ties broken by artifact id ascending.
inline RankedSelection rank_select(const std::vector<ScoredArtifact>& scored, std::size_t s) {
    RankedSelection out;
    for (const auto& sa : scored) {
        switch (sa.artifact.category) {
            case ArtifactCategory::text: out.text.push_back(sa); break;
            case ArtifactCategory::graphics_text: out.graphics_text.push_back(sa); break;
            case ArtifactCategory::graphics_no_text: out.graphics_no_text.push_back(sa); break;
        }
    }
    for (auto* list : {&out.text, &out.graphics_text, &out.graphics_no_text}) {
        std::stable_sort(list->begin(), list->end(), impact_order);
        if (list->size() > s) list->resize(s);
    }
    return out;
}

struct CellScore {
    GridCell cell;
    int n = 0;
    int hits = 0;
    double score = 0.0;
    bool skipped = false;  // cell did not fit some image
};

struct PlacementSearchResult {
    CellPlacement best;
    std::vector<CellScore> cells;  // row-major over the grid
};

// Fixed-location impact per grid cell; best = argmax with ties resolved in
// reading order (row-major, top-left first).
inline PlacementSearchResult optimize_placement(const Artifact& artifact,
                                                const PlacementGrid& grid,
                                                const std::vector<ImageSample>& opposing,
                                                const ClassifierOracle& oracle, int target_class,
                                                const ClassPromptSet& prompts,
                                                const ImpactConfig& cfg = {}) {
    if (opposing.empty()) fail(ErrorKind::validation, "optimize_placement: empty opposing set");
    const Image payload = artifact_payload(artifact, cfg.text_style);
    PlacementSearchResult result;
    result.cells.resize(static_cast<std::size_t>(grid.cell_count()));
    int best_index = -1;
    for (int idx = 0; idx < grid.cell_count(); ++idx) {
        auto& cs = result.cells[static_cast<std::size_t>(idx)];
        cs.cell = grid.cell_at(idx);
        const CellPlacement cp{cs.cell, cfg.shrink_factor, cfg.opacity};
        std::vector<Image> modified;
        bool fits_all = true;
        for (const auto& sample : opposing) {
            try {
                const Placement p = resolve_cell_placement(grid, cp, sample.image.width,
                                                           sample.image.height, payload.width,
                                                           payload.height);
                modified.push_back(composite(sample.image, payload, p));
            } catch (const Error&) {
                fits_all = false;
                break;
            }
        }
        if (!fits_all) {
            cs.skipped = true;
            continue;
        }
        const auto preds = classify_batch(oracle, modified, prompts);
        for (const auto& pred : preds) {
            if (pred.unparseable) continue;
            ++cs.n;
            if (pred.argmax == target_class) ++cs.hits;
        }
        if (cs.n == 0) {
            cs.skipped = true;
            continue;
        }
        cs.score = static_cast<double>(cs.hits) / cs.n;
        if (best_index < 0 || cs.score > result.cells[static_cast<std::size_t>(best_index)].score) {
            best_index = idx;
        }
    }
    if (best_index < 0) {
        fail(ErrorKind::validation,
             "optimize_placement: no grid cell fits artifact '" + artifact.id + "'");
    }
    result.best = CellPlacement{grid.cell_at(best_index), cfg.shrink_factor, cfg.opacity};
    return result;
}

struct AttackComponent {
    Artifact artifact;
    CellPlacement placement;
};

// One attack: ordered artifact/placement pairs aimed at a target class.
struct AttackSpec {
    int target_class = 0;
    PlacementGrid grid;
    std::vector<AttackComponent> components;
};

inline void validate_attack(const AttackSpec& attack) {
    if (attack.components.empty()) fail(ErrorKind::validation, "attack: no components");
    for (std::size_t i = 0; i < attack.components.size(); ++i) {
        validate_artifact(attack.components[i].artifact);
        for (std::size_t j = 0; j < i; ++j) {
            if (attack.components[j].placement.cell == attack.components[i].placement.cell) {
                fail(ErrorKind::validation, "attack: overlapping placements (same grid cell)");
            }
        }
    }
}

struct PlacedArtifact {
    Artifact artifact;
    PlacementSearchResult placement;
};

// Greedy combination: each artifact keeps its optimized cell when free,
// otherwise takes its next-best usable cell from its own score map.
inline AttackSpec combine(const std::vector<PlacedArtifact>& singles, int target_class,
                          const PlacementGrid& grid) {
    if (singles.empty()) fail(ErrorKind::validation, "combine: no attacks given");
    if (singles.size() > 3) fail(ErrorKind::validation, "combine: at most three artifacts");
    std::map<std::string, int> per_category;
    for (const auto& s : singles) {
        if (++per_category[category_name(s.artifact.category)] > 1) {
            fail(ErrorKind::validation, "combine: at most one artifact per category");
        }
    }
    AttackSpec attack;
    attack.target_class = target_class;
    attack.grid = grid;
    std::vector<GridCell> taken;
    for (const auto& s : singles) {
        // Candidate cells: best first, then the rest of the map by score
        // descending with reading-order ties, skipped cells excluded.
        std::vector<CellScore> order = s.placement.cells;
        std::stable_sort(order.begin(), order.end(),
                         [](const CellScore& a, const CellScore& b) { return a.score > b.score; });
        std::optional<GridCell> chosen;
        auto free_cell = [&](GridCell c) {
            return std::none_of(taken.begin(), taken.end(),
                                [&](GridCell t) { return t == c; });
        };
        if (free_cell(s.placement.best.cell)) {
            chosen = s.placement.best.cell;
        } else {
            for (const auto& cs : order) {
                if (cs.skipped || !free_cell(cs.cell)) continue;
                chosen = cs.cell;
                break;
            }
        }
        if (!chosen) {
            fail(ErrorKind::validation,
                 "combine: no non-overlapping cell available for artifact '" + s.artifact.id + "'");
        }
        taken.push_back(*chosen);
        attack.components.push_back(AttackComponent{
            s.artifact,
            CellPlacement{*chosen, s.placement.best.shrink_factor, s.placement.best.opacity}});
    }
    validate_attack(attack);
    return attack;
}

}  // namespace webart
