#pragma once
// Attack evaluation with the occlusion control: a sample counts toward strict
// ASR only if it is still classified correctly when the attack's regions are
// masked out, so success cannot be attributed to covering real evidence.
// Also: transferability matrices across oracles and size/opacity/sample-count
// ablation sweeps.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "webart/catalog.hpp"
#include "webart/common.hpp"
#include "webart/imaging.hpp"
#include "webart/manifest.hpp"
#include "webart/oracle.hpp"
#include "webart/search.hpp"
#include "webart/serialize.hpp"

namespace webart {

inline constexpr Rgb kDefaultMaskFill{128, 128, 128};

struct EvalConfig {
    Rgb mask_fill = kDefaultMaskFill;
    TextStyle text_style;
};

struct SampleEval {
    std::string sample_id;
    int label = -1;
    int clean_pred = -1;
    int masked_pred = -1;
    int attacked_pred = -1;
    bool retained = false;   // masked image still classified as its label
    bool success = false;    // retained and attacked image predicted as target
    bool oracle_failed = false;
    double confidence_delta = 0.0;  // score(target | attacked) - score(target | clean)
    double logit_delta = 0.0;       // same on raw similarities when available
    bool has_logit_delta = false;
};

struct ASRReport {
    AttackSpec attack;
    std::string oracle_identity;
    std::string split;
    Rgb mask_fill = kDefaultMaskFill;
    int n_total = 0;
    int n_retained = 0;
    int successes = 0;        // among retained samples
    int naive_successes = 0;  // over all samples, no masking filter
    double asr = 0.0;         // successes / n_retained
    double naive_asr = 0.0;   // naive_successes / n_total
    double mean_confidence_delta = 0.0;  // over retained samples
    std::optional<double> mean_logit_delta;
    std::vector<SampleEval> per_sample;
};

// Pixel regions all components of an attack touch on a given image.
inline std::vector<PixelRegion> attack_regions(const AttackSpec& attack, const Image& image,
                                               const TextStyle& style = {}) {
    std::vector<PixelRegion> regions;
    for (const auto& comp : attack.components) {
        const Image payload = artifact_payload(comp.artifact, style);
        const Placement p = resolve_cell_placement(attack.grid, comp.placement, image.width,
                                                   image.height, payload.width, payload.height);
        regions.push_back(
            placement_region(p, image.width, image.height, payload.width, payload.height));
    }
    return regions;
}

inline Image apply_attack(const AttackSpec& attack, const Image& image,
                          const TextStyle& style = {}) {
    Image out = image;
    for (const auto& comp : attack.components) {
        const Image payload = artifact_payload(comp.artifact, style);
        const Placement p = resolve_cell_placement(attack.grid, comp.placement, out.width,
                                                   out.height, payload.width, payload.height);
        out = composite(out, payload, p);
    }
    return out;
}

inline Image mask_attack_regions(const AttackSpec& attack, const Image& image, Rgb fill,
                                 const TextStyle& style = {}) {
    Image out = image;
    for (const auto& region : attack_regions(attack, image, style)) {
        out = mask_region(out, region, fill);
    }
    return out;
}

// Strict, masking-validated ASR on a held-out split, with the unfiltered
// (naive) rate reported alongside to expose the occlusion confound.
inline ASRReport evaluate_asr(const AttackSpec& attack, const std::vector<ImageSample>& test,
                              const ClassifierOracle& oracle, const ClassPromptSet& prompts,
                              const EvalConfig& cfg = {}) {
    validate_attack(attack);
    if (test.empty()) fail(ErrorKind::validation, "evaluate_asr: empty test set");
    for (const auto& s : test) {
        if (s.label.id == attack.target_class) {
            fail(ErrorKind::validation,
                 "evaluate_asr: test sample '" + s.source_path + "' has the target label");
        }
        if (s.split != Split::test) {
            fail(ErrorKind::validation,
                 "evaluate_asr: sample '" + s.source_path + "' is not from the test split");
        }
    }

    std::vector<Image> clean, masked, attacked;
    clean.reserve(test.size());
    for (const auto& s : test) {
        clean.push_back(s.image);
        masked.push_back(mask_attack_regions(attack, s.image, cfg.mask_fill, cfg.text_style));
        attacked.push_back(apply_attack(attack, s.image, cfg.text_style));
    }
    const auto clean_preds = classify_batch(oracle, clean, prompts);
    const auto masked_preds = classify_batch(oracle, masked, prompts);
    const auto attacked_preds = classify_batch(oracle, attacked, prompts);

    ASRReport report;
    report.attack = attack;
    report.oracle_identity = oracle.descriptor().identity;
    report.split = split_name(Split::test);
    report.mask_fill = cfg.mask_fill;
    report.n_total = static_cast<int>(test.size());

    double delta_sum = 0.0;
    double logit_sum = 0.0;
    int logit_count = 0;
    const auto target = static_cast<std::size_t>(attack.target_class);
    for (std::size_t i = 0; i < test.size(); ++i) {
        SampleEval se;
        se.sample_id = test[i].source_path;
        se.label = test[i].label.id;
        se.oracle_failed = clean_preds[i].unparseable || masked_preds[i].unparseable ||
                           attacked_preds[i].unparseable;
        se.clean_pred = clean_preds[i].unparseable ? -1 : clean_preds[i].argmax;
        se.masked_pred = masked_preds[i].unparseable ? -1 : masked_preds[i].argmax;
        se.attacked_pred = attacked_preds[i].unparseable ? -1 : attacked_preds[i].argmax;
        if (se.attacked_pred == attack.target_class) ++report.naive_successes;
        se.retained = !se.oracle_failed && se.masked_pred == se.label;
        if (se.retained) {
            ++report.n_retained;
            se.success = se.attacked_pred == attack.target_class;
            if (se.success) ++report.successes;
            se.confidence_delta = attacked_preds[i].scores[target] - clean_preds[i].scores[target];
            delta_sum += se.confidence_delta;
            if (!attacked_preds[i].logits.empty() && !clean_preds[i].logits.empty()) {
                se.logit_delta = attacked_preds[i].logits[target] - clean_preds[i].logits[target];
                se.has_logit_delta = true;
                logit_sum += se.logit_delta;
                ++logit_count;
            }
        }
        report.per_sample.push_back(std::move(se));
    }
    if (report.n_retained == 0) {
        fail(ErrorKind::validation, "evaluate_asr: no-valid-samples (masking validation rejected all)");
    }
    report.asr = static_cast<double>(report.successes) / report.n_retained;
    report.naive_asr = static_cast<double>(report.naive_successes) / report.n_total;
    report.mean_confidence_delta = delta_sum / report.n_retained;
    if (logit_count > 0) report.mean_logit_delta = logit_sum / logit_count;
    return report;
}

inline void to_json(json& j, const SampleEval& s) {
    j = json{{"sample_id", s.sample_id},
             {"label", s.label},
             {"clean_pred", s.clean_pred},
             {"masked_pred", s.masked_pred},
             {"attacked_pred", s.attacked_pred},
             {"retained", s.retained},
             {"success", s.success},
             {"oracle_failed", s.oracle_failed},
             {"confidence_delta", s.confidence_delta}};
    if (s.has_logit_delta) j["logit_delta"] = s.logit_delta;
}

inline void from_json(const json& j, SampleEval& s) {
    s.sample_id = j.at("sample_id").get<std::string>();
    s.label = j.at("label").get<int>();
    s.clean_pred = j.at("clean_pred").get<int>();
    s.masked_pred = j.at("masked_pred").get<int>();
    s.attacked_pred = j.at("attacked_pred").get<int>();
    s.retained = j.at("retained").get<bool>();
    s.success = j.at("success").get<bool>();
    s.oracle_failed = j.at("oracle_failed").get<bool>();
    s.confidence_delta = j.at("confidence_delta").get<double>();
    s.has_logit_delta = j.contains("logit_delta");
    if (s.has_logit_delta) s.logit_delta = j.at("logit_delta").get<double>();
}

inline void to_json(json& j, const ASRReport& r) {
    j = json{{"schema", "v1"},
             {"attack", r.attack},
             {"oracle_identity", r.oracle_identity},
             {"split", r.split},
             {"mask_fill", r.mask_fill},
             {"n_total", r.n_total},
             {"n_retained", r.n_retained},
             {"successes", r.successes},
             {"naive_successes", r.naive_successes},
             {"asr", r.asr},
             {"naive_asr", r.naive_asr},
             {"mean_confidence_delta", r.mean_confidence_delta},
             {"per_sample", r.per_sample}};
    if (r.mean_logit_delta) j["mean_logit_delta"] = *r.mean_logit_delta;
}

inline void from_json(const json& j, ASRReport& r) {
    r.attack = j.at("attack").get<AttackSpec>();
    r.oracle_identity = j.at("oracle_identity").get<std::string>();
    r.split = j.at("split").get<std::string>();
    r.mask_fill = j.at("mask_fill").get<Rgb>();
    r.n_total = j.at("n_total").get<int>();
    r.n_retained = j.at("n_retained").get<int>();
    r.successes = j.at("successes").get<int>();
    r.naive_successes = j.at("naive_successes").get<int>();
    r.asr = j.at("asr").get<double>();
    r.naive_asr = j.at("naive_asr").get<double>();
    r.mean_confidence_delta = j.at("mean_confidence_delta").get<double>();
    if (j.contains("mean_logit_delta")) r.mean_logit_delta = j.at("mean_logit_delta").get<double>();
    r.per_sample = j.at("per_sample").get<std::vector<SampleEval>>();
}

// Source oracles x evaluation oracles grid of mean strict ASR per category.
struct TransferMatrix {
    std::vector<std::string> source_identities;
    std::vector<std::string> eval_identities;
    // category -> [source][eval] mean ASR; NaN marks an empty category.
    std::map<std::string, std::vector<std::vector<double>>> cells;
};

inline void to_json(json& j, const TransferMatrix& m) {
    j = json{{"schema", "v1"},
             {"source_identities", m.source_identities},
             {"eval_identities", m.eval_identities},
             {"cells", json::object()}};
    for (const auto& [cat, grid] : m.cells) {
        json rows = json::array();
        for (const auto& row : grid) {
            json cols = json::array();
            for (double v : row) {
                if (std::isnan(v)) cols.push_back(nullptr);
                else cols.push_back(v);
            }
            rows.push_back(cols);
        }
        j["cells"][cat] = rows;
    }
}

inline void from_json(const json& j, TransferMatrix& m) {
    m.source_identities = j.at("source_identities").get<std::vector<std::string>>();
    m.eval_identities = j.at("eval_identities").get<std::vector<std::string>>();
    for (const auto& [cat, rows] : j.at("cells").items()) {
        std::vector<std::vector<double>> grid;
        for (const auto& row : rows) {
            std::vector<double> cols;
            for (const auto& v : row) {
                cols.push_back(v.is_null() ? std::nan("") : v.get<double>());
            }
            grid.push_back(std::move(cols));
        }
        m.cells[cat] = std::move(grid);
    }
}

struct TransferConfig {
    std::size_t top_s = 10;  // artifacts per category entering each cell
    EvalConfig eval;
};

// cell (i, j): mean strict ASR of the top-s artifacts from catalog i (mined
// on source oracle i) evaluated on oracle j, per category.
inline TransferMatrix transfer_eval(const std::vector<ArtifactCatalog>& catalogs,
                                    const std::vector<const ClassifierOracle*>& oracles,
                                    const std::vector<ImageSample>& test,
                                    const ClassPromptSet& prompts,
                                    const TransferConfig& cfg = {}) {
    if (catalogs.empty() || oracles.empty()) {
        fail(ErrorKind::validation, "transfer_eval: need at least one catalog and one oracle");
    }
    for (const auto& cat : catalogs) {
        if (cat.target_class.id != catalogs[0].target_class.id) {
            fail(ErrorKind::validation, "transfer_eval: catalogs disagree on target class");
        }
    }
    TransferMatrix matrix;
    for (const auto& cat : catalogs) matrix.source_identities.push_back(cat.oracle_identity);
    for (const auto* o : oracles) matrix.eval_identities.push_back(o->descriptor().identity);
    for (ArtifactCategory category : {ArtifactCategory::text, ArtifactCategory::graphics_text,
                                      ArtifactCategory::graphics_no_text}) {
        std::vector<std::vector<double>> grid(
            catalogs.size(), std::vector<double>(oracles.size(), std::nan("")));
        for (std::size_t i = 0; i < catalogs.size(); ++i) {
            const auto& entries = catalogs[i].category(category);
            const std::size_t take = std::min(cfg.top_s, entries.size());
            if (take == 0) continue;
            for (std::size_t jx = 0; jx < oracles.size(); ++jx) {
                double sum = 0.0;
                for (std::size_t e = 0; e < take; ++e) {
                    const auto& entry = entries[e];
                    AttackSpec attack;
                    attack.target_class = catalogs[i].target_class.id;
                    attack.grid = catalogs[i].grid;
                    const CellPlacement placement = entry.best_placement.value_or(
                        CellPlacement{catalogs[i].grid.cell_at(0), 10.0, 1.0});
                    attack.components.push_back(AttackComponent{entry.artifact, placement});
                    sum += evaluate_asr(attack, test, *oracles[jx], prompts, cfg.eval).asr;
                }
                grid[i][jx] = sum / static_cast<double>(take);
            }
        }
        matrix.cells[category_name(category)] = std::move(grid);
    }
    return matrix;
}

enum class SweepAxis { shrink_factor, opacity, train_sample_count };

inline const char* sweep_axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::shrink_factor: return "shrink_factor";
        case SweepAxis::opacity: return "opacity";
        case SweepAxis::train_sample_count: return "train_sample_count";
    }
    fail(ErrorKind::validation, "bad sweep axis");
}

inline SweepAxis parse_sweep_axis(std::string_view s) {
    if (s == "shrink_factor") return SweepAxis::shrink_factor;
    if (s == "opacity") return SweepAxis::opacity;
    if (s == "train_sample_count") return SweepAxis::train_sample_count;
    fail(ErrorKind::parse, "unknown sweep axis '" + std::string(s) + "'");
}

struct SweepRow {
    double value = 0.0;
    double metric = 0.0;
    int n = 0;
};

struct SweepTable {
    std::string axis;
    std::string metric_name;  // "strict_asr" or "impact_score"
    std::vector<SweepRow> rows;
};

inline void to_json(json& j, const SweepRow& r) {
    j = json{{"value", r.value}, {"metric", r.metric}, {"n", r.n}};
}

inline void from_json(const json& j, SweepRow& r) {
    r.value = j.at("value").get<double>();
    r.metric = j.at("metric").get<double>();
    r.n = j.at("n").get<int>();
}

inline void to_json(json& j, const SweepTable& t) {
    j = json{{"schema", "v1"}, {"axis", t.axis}, {"metric", t.metric_name}, {"rows", t.rows}};
}

inline void from_json(const json& j, SweepTable& t) {
    t.axis = j.at("axis").get<std::string>();
    t.metric_name = j.at("metric").get<std::string>();
    t.rows = j.at("rows").get<std::vector<SweepRow>>();
}

struct SweepConfig {
    std::uint64_t seed = 0;       // sample-count axis subsampling
    PlacementGrid grid;           // sample-count axis re-scoring
    EvalConfig eval;
};

// Re-runs the relevant stage per axis value. Size/opacity re-composite and
// re-evaluate strict ASR; the sample-count axis re-runs random-placement
// impact scoring on a seeded subsample of the opposing pool.
inline SweepTable sweep(const AttackSpec& attack, const std::vector<ImageSample>& samples,
                        const ClassifierOracle& oracle, const ClassPromptSet& prompts,
                        SweepAxis axis, const std::vector<double>& values,
                        const SweepConfig& cfg = {}) {
    if (values.empty()) fail(ErrorKind::validation, "sweep: no values");
    if (!std::is_sorted(values.begin(), values.end())) {
        fail(ErrorKind::validation, "sweep: values must be sorted ascending");
    }
    SweepTable table;
    table.axis = sweep_axis_name(axis);
    if (axis == SweepAxis::train_sample_count) {
        if (attack.components.size() != 1) {
            fail(ErrorKind::validation, "sweep: sample-count axis expects a single-artifact attack");
        }
        table.metric_name = "impact_score";
        for (double v : values) {
            const auto want = static_cast<std::size_t>(v);
            if (want < 1 || v != std::floor(v)) {
                fail(ErrorKind::validation, "sweep: sample counts must be positive integers");
            }
            Rng rng(cfg.seed ^ fnv1a64("sweep-count/" + format_double(v)));
            std::vector<ImageSample> subset;
            for (std::size_t i : sample_indices(samples.size(), want, rng)) {
                subset.push_back(samples[i]);
            }
            ImpactConfig icfg;
            icfg.grid = cfg.grid;
            icfg.shrink_factor = attack.components[0].placement.shrink_factor;
            icfg.opacity = attack.components[0].placement.opacity;
            icfg.text_style = cfg.eval.text_style;
            const auto rec = impact_score(attack.components[0].artifact, subset, oracle,
                                          attack.target_class, prompts, cfg.seed, icfg);
            table.rows.push_back(SweepRow{v, rec.score, rec.n});
        }
        return table;
    }
    table.metric_name = "strict_asr";
    for (double v : values) {
        AttackSpec varied = attack;
        for (auto& comp : varied.components) {
            if (axis == SweepAxis::shrink_factor) {
                comp.placement.shrink_factor = v;
            } else {
                comp.placement.opacity = v;
            }
        }
        const auto report = evaluate_asr(varied, samples, oracle, prompts, cfg.eval);
        table.rows.push_back(SweepRow{v, report.asr, report.n_retained});
    }
    return table;
}

}  // namespace webart
