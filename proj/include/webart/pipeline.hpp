#pragma once
// End-to-end orchestration: mine -> score -> rank -> place -> attack -> eval
// (-> mitigate), with content-addressed stage caching, an exclusive lock on
// the output directory, and a manifest of produced files with hashes.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "webart/catalog.hpp"
#include "webart/common.hpp"
#include "webart/eval.hpp"
#include "webart/manifest.hpp"
#include "webart/mining.hpp"
#include "webart/mitigation.hpp"
#include "webart/oracle_config.hpp"
#include "webart/plot.hpp"
#include "webart/search.hpp"
#include "webart/serialize.hpp"
#include "webart/sha256.hpp"

namespace webart {

inline constexpr const char* kCodeVersion = "webart-0.1.0";

struct SweepSpec {
    SweepAxis axis = SweepAxis::shrink_factor;
    std::vector<double> values;
};

struct PipelineConfig {
    std::uint64_t seed = 0;
    std::filesystem::path corpus;
    std::filesystem::path manifest;
    std::filesystem::path output_dir;
    std::filesystem::path cache_dir;  // empty disables the embedding cache

    json oracle;                   // classification oracle config block
    json retrieval_oracle;         // embedding oracle for mining; empty = use `oracle`
    json detector = json{{"kind", "builtin"}};

    // mining
    std::vector<std::string> prompts{"a photo of a graphic"};
    double keep_fraction = 0.01;
    double ocr_threshold = kDefaultOcrThreshold;

    // search
    std::string target_class;  // name or numeric id
    std::size_t top_s = 10;
    PlacementGrid grid;
    std::size_t search_per_class_cap = 32;
    double shrink_factor = 10.0;
    double opacity = 1.0;

    // eval
    std::size_t eval_per_class_cap = 32;
    Rgb mask_fill = kDefaultMaskFill;
    bool combine_attacks = true;
    std::vector<SweepSpec> sweeps;

    // mitigation
    bool mitigation_enabled = false;
    json captioner = json{{"kind", "color"}};
    bool mitigation_blind = false;

    std::string prompt_template = kDefaultPromptTemplate;
};

inline PlacementGrid parse_grid(const std::string& s) {
    const auto parts = split(s, 'x');
    if (parts.size() != 2) fail(ErrorKind::parse, "grid must look like '3x3', got '" + s + "'");
    PlacementGrid g;
    try {
        g.rows = std::stoi(parts[0]);
        g.cols = std::stoi(parts[1]);
    } catch (const std::exception&) {
        fail(ErrorKind::parse, "grid must look like '3x3', got '" + s + "'");
    }
    if (g.rows < 1 || g.cols < 1) fail(ErrorKind::validation, "grid dimensions must be positive");
    return g;
}

// Loads and validates a pipeline config file. Relative paths resolve against
// the config file's directory; a missing seed is a validation error.
inline PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    const json j = parse_json_file(path);
    const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    auto resolve = [&](const std::string& p) -> std::filesystem::path {
        const std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };

    PipelineConfig cfg;
    if (!j.contains("seed")) fail(ErrorKind::validation, "pipeline config: seed is mandatory");
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.corpus = resolve(j.at("corpus").get<std::string>());
    cfg.manifest = resolve(j.at("manifest").get<std::string>());
    cfg.output_dir = resolve(j.at("output_dir").get<std::string>());
    if (j.contains("cache_dir")) {
        cfg.cache_dir = resolve(j.at("cache_dir").get<std::string>());
    } else if (const char* env = std::getenv("WEBART_CACHE")) {
        cfg.cache_dir = env;
    }
    cfg.oracle = j.at("oracle");
    if (j.contains("retrieval_oracle")) cfg.retrieval_oracle = j.at("retrieval_oracle");

    if (j.contains("mining")) {
        const auto& m = j.at("mining");
        if (m.contains("prompts_file")) {
            cfg.prompts.clear();
            for (const auto& line : split(read_file_bytes(resolve(m.at("prompts_file"))), '\n')) {
                const std::string t = trim(line);
                if (!t.empty()) cfg.prompts.push_back(t);
            }
        } else if (m.contains("prompts")) {
            cfg.prompts = m.at("prompts").get<std::vector<std::string>>();
        }
        cfg.keep_fraction = m.value("keep_fraction", cfg.keep_fraction);
        cfg.ocr_threshold = m.value("ocr_threshold", cfg.ocr_threshold);
        if (m.contains("detector")) cfg.detector = m.at("detector");
    }

    const auto& s = j.at("search");
    if (s.at("target_class").is_number()) {
        cfg.target_class = std::to_string(s.at("target_class").get<int>());
    } else {
        cfg.target_class = s.at("target_class").get<std::string>();
    }
    cfg.top_s = s.value("top_s", cfg.top_s);
    if (s.contains("grid")) cfg.grid = parse_grid(s.at("grid").get<std::string>());
    cfg.search_per_class_cap = s.value("per_class_cap", cfg.search_per_class_cap);
    cfg.shrink_factor = s.value("shrink_factor", cfg.shrink_factor);
    cfg.opacity = s.value("opacity", cfg.opacity);

    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        cfg.eval_per_class_cap = e.value("per_class_cap", cfg.eval_per_class_cap);
        if (e.contains("mask_fill")) cfg.mask_fill = e.at("mask_fill").get<Rgb>();
        cfg.combine_attacks = e.value("combine", cfg.combine_attacks);
        if (e.contains("sweeps")) {
            for (const auto& sw : e.at("sweeps")) {
                SweepSpec spec;
                spec.axis = parse_sweep_axis(sw.at("axis").get<std::string>());
                spec.values = sw.at("values").get<std::vector<double>>();
                cfg.sweeps.push_back(std::move(spec));
            }
        }
    }
    if (j.contains("mitigation")) {
        const auto& mit = j.at("mitigation");
        cfg.mitigation_enabled = mit.value("enabled", false);
        if (mit.contains("captioner")) cfg.captioner = mit.at("captioner");
        cfg.mitigation_blind = mit.value("blind", false);
    }
    if (j.contains("prompt_template")) {
        cfg.prompt_template = j.at("prompt_template").get<std::string>();
    } else if (cfg.oracle.contains("prompt_template")) {
        // adapters may carry their own template
        cfg.prompt_template = cfg.oracle.at("prompt_template").get<std::string>();
    }

    if (!std::filesystem::exists(cfg.corpus)) {
        fail(ErrorKind::validation, "pipeline config: corpus path not found: " + cfg.corpus.string());
    }
    if (!std::filesystem::exists(cfg.manifest)) {
        fail(ErrorKind::validation,
             "pipeline config: manifest path not found: " + cfg.manifest.string());
    }
    if (cfg.prompts.empty()) fail(ErrorKind::validation, "pipeline config: empty prompt set");
    return cfg;
}

// Serialized back out for provenance; every report directory embeds this.
inline json pipeline_config_json(const PipelineConfig& cfg) {
    json sweeps = json::array();
    for (const auto& sw : cfg.sweeps) {
        sweeps.push_back(json{{"axis", sweep_axis_name(sw.axis)}, {"values", sw.values}});
    }
    return json{
        {"seed", cfg.seed},
        {"corpus", cfg.corpus.string()},
        {"manifest", cfg.manifest.string()},
        {"output_dir", cfg.output_dir.string()},
        {"cache_dir", cfg.cache_dir.string()},
        {"oracle", cfg.oracle},
        {"retrieval_oracle", cfg.retrieval_oracle},
        {"mining",
         json{{"prompts", cfg.prompts},
              {"keep_fraction", cfg.keep_fraction},
              {"ocr_threshold", cfg.ocr_threshold},
              {"detector", cfg.detector}}},
        {"search",
         json{{"target_class", cfg.target_class},
              {"top_s", cfg.top_s},
              {"grid", cfg.grid},
              {"per_class_cap", cfg.search_per_class_cap},
              {"shrink_factor", cfg.shrink_factor},
              {"opacity", cfg.opacity}}},
        {"eval",
         json{{"per_class_cap", cfg.eval_per_class_cap},
              {"mask_fill", cfg.mask_fill},
              {"combine", cfg.combine_attacks},
              {"sweeps", sweeps}}},
        {"mitigation",
         json{{"enabled", cfg.mitigation_enabled},
              {"captioner", cfg.captioner},
              {"blind", cfg.mitigation_blind}}},
        {"prompt_template", cfg.prompt_template},
        {"code_version", kCodeVersion}};
}

struct StageStatus {
    std::string name;
    std::string key;
    bool cached = false;
};

struct RunSummary {
    std::vector<StageStatus> stages;
    std::filesystem::path manifest_path;
};

namespace detail {

class OutputLock {
public:
    explicit OutputLock(const std::filesystem::path& dir) : path_(dir / ".webart.lock") {
        std::filesystem::create_directories(dir);
        if (std::filesystem::exists(path_)) {
            fail(ErrorKind::stage, "output directory is locked (" + path_.string() +
                                       "); remove the lock if no other run is active");
        }
        write_file_bytes(path_, "locked\n");
    }

    ~OutputLock() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }

    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;

private:
    std::filesystem::path path_;
};

inline std::string corpus_content_hash(const CorpusReader& corpus) {
    Sha256 h;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const CorpusRecord rec = corpus.record(i);
        h.update(rec.id);
        h.update(image_content_key(rec.image));
        h.update(rec.caption);
    }
    const auto d = h.digest();
    return hex_string(d.data(), d.size());
}

inline std::string stage_key(const std::string& stage, const json& inputs) {
    Sha256 h;
    h.update(kCodeVersion);
    h.update("/" + stage + "/");
    h.update(inputs.dump());
    const auto d = h.digest();
    return hex_string(d.data(), 6);  // 12 hex chars
}

// Runs `body` into a content-addressed stage directory unless a completed
// run with the same key already exists. `publish` maps stage-local names to
// stable names in the output root.
template <typename Body>
StageStatus run_stage(const std::filesystem::path& out_root, const std::string& name,
                      const json& key_inputs, const std::vector<std::string>& outputs,
                      Body&& body) {
    StageStatus status;
    status.name = name;
    status.key = stage_key(name, key_inputs);
    const auto stage_dir = out_root / "stages" / (name + "-" + status.key);
    const auto marker = stage_dir / "_complete";
    if (std::filesystem::exists(marker)) {
        status.cached = true;
    } else {
        std::filesystem::create_directories(stage_dir);
        try {
            body(stage_dir);
        } catch (const std::exception& e) {
            // Halt with the stage name; partial outputs stay in stage_dir.
            fail(ErrorKind::stage, "stage '" + name + "' failed: " + e.what());
        }
        write_file_bytes(marker, status.key + "\n");
    }
    for (const auto& rel : outputs) {
        const auto src = stage_dir / rel;
        if (!std::filesystem::exists(src)) {
            fail(ErrorKind::stage, "stage '" + name + "' did not produce " + rel);
        }
        std::filesystem::copy_file(src, out_root / rel,
                                   std::filesystem::copy_options::overwrite_existing);
    }
    return status;
}

}  // namespace detail

inline ArtifactCatalog build_catalog(const ClassLabel& target, const RankedSelection& ranked,
                                     const PlacementGrid& grid, std::uint64_t seed,
                                     const std::string& oracle_identity, Split split) {
    ArtifactCatalog cat;
    cat.target_class = target;
    cat.grid = grid;
    cat.seed = seed;
    cat.oracle_identity = oracle_identity;
    cat.split_used = split_name(split);
    for (ArtifactCategory c : {ArtifactCategory::text, ArtifactCategory::graphics_text,
                               ArtifactCategory::graphics_no_text}) {
        for (const auto& sa : ranked.category(c)) {
            cat.category(c).push_back(CatalogEntry{sa.artifact, sa.record, std::nullopt, std::nullopt});
        }
    }
    sort_catalog(cat);
    return cat;
}

// Executes the full pipeline. Every stage is keyed by its inputs, so a rerun
// with an unchanged config recomputes nothing and reproduces the manifest.
inline RunSummary run_pipeline(const PipelineConfig& cfg) {
    const auto out = cfg.output_dir;
    detail::OutputLock lock(out);

    const DatasetManifest manifest = load_manifest(cfg.manifest);
    const ClassLabel target = [&]() -> ClassLabel {
        try {
            return manifest.class_by_id(std::stoi(cfg.target_class));
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            return manifest.class_by_name(cfg.target_class);
        }
    }();
    const auto oracle = make_oracle(cfg.oracle);
    const std::string oracle_id = oracle->descriptor().identity;
    const ClassPromptSet prompts = make_prompts(manifest.classes, cfg.prompt_template);
    const std::string manifest_hash = sha256_hex(read_file_bytes(cfg.manifest));
    const json config_echo = pipeline_config_json(cfg);

    RunSummary summary;

    // --- mine ---
    CorpusReader corpus = CorpusReader::open(cfg.corpus);
    const auto retrieval_oracle =
        cfg.retrieval_oracle.is_null() ? oracle : make_oracle(cfg.retrieval_oracle);
    const std::string corpus_hash = detail::corpus_content_hash(corpus);
    const json mine_key = {{"corpus", corpus_hash},
                           {"oracle", retrieval_oracle->descriptor().identity},
                           {"prompts", cfg.prompts},
                           {"keep_fraction", cfg.keep_fraction},
                           {"ocr_threshold", cfg.ocr_threshold},
                           {"detector", cfg.detector},
                           {"classes", manifest.class_names()}};
    summary.stages.push_back(detail::run_stage(
        out, "mine", mine_key, {"candidates.json"}, [&](const std::filesystem::path& dir) {
            const EmbeddingCache cache(cfg.cache_dir);
            const auto candidates = retrieve_candidates(
                corpus,
                MiningConfig{cfg.prompts, cfg.keep_fraction, cfg.ocr_threshold,
                             manifest.class_names()},
                *retrieval_oracle, cache);
            const auto detector = make_text_detector(cfg.detector);
            const MiningResult mined =
                categorize(candidates, manifest.class_names(), detector.get(), cfg.ocr_threshold);
            json j = mined;
            j["config"] = config_echo;
            write_json_file(dir / "candidates.json", j);
        }));

    // --- score ---
    const std::string candidates_hash = sha256_hex(read_file_bytes(out / "candidates.json"));
    const json score_key = {{"candidates", candidates_hash},
                            {"manifest", manifest_hash},
                            {"oracle", oracle_id},
                            {"seed", cfg.seed},
                            {"target", target.id},
                            {"per_class_cap", cfg.search_per_class_cap},
                            {"grid", cfg.grid},
                            {"shrink", cfg.shrink_factor},
                            {"opacity", cfg.opacity},
                            {"prompt_template", cfg.prompt_template}};
    summary.stages.push_back(detail::run_stage(
        out, "score", score_key, {"records.json"}, [&](const std::filesystem::path& dir) {
            const MiningResult mined = parse_json_file(out / "candidates.json").get<MiningResult>();
            const auto opposing =
                opposing_set(manifest, target.id, Split::train, cfg.search_per_class_cap, cfg.seed);
            ImpactConfig icfg;
            icfg.grid = cfg.grid;
            icfg.shrink_factor = cfg.shrink_factor;
            icfg.opacity = cfg.opacity;
            std::vector<ScoredArtifact> scored;
            for (const auto& artifact : all_artifacts(mined)) {
                scored.push_back(ScoredArtifact{
                    artifact,
                    impact_score(artifact, opposing, *oracle, target.id, prompts, cfg.seed, icfg)});
            }
            write_json_file(dir / "records.json",
                            json{{"schema", "v1"}, {"records", scored}, {"config", config_echo}});
        }));

    // --- rank ---
    const std::string records_hash = sha256_hex(read_file_bytes(out / "records.json"));
    const json rank_key = {{"records", records_hash}, {"top_s", cfg.top_s}};
    summary.stages.push_back(detail::run_stage(
        out, "rank", rank_key, {"catalog.json"}, [&](const std::filesystem::path& dir) {
            const auto scored =
                parse_json_file(out / "records.json").at("records").get<std::vector<ScoredArtifact>>();
            const RankedSelection ranked = rank_select(scored, cfg.top_s);
            const ArtifactCatalog cat =
                build_catalog(target, ranked, cfg.grid, cfg.seed, oracle_id, Split::train);
            save_catalog(cat, dir / "catalog.json");
        }));

    // --- place ---
    const std::string catalog_hash = sha256_hex(read_file_bytes(out / "catalog.json"));
    const json place_key = {{"catalog", catalog_hash},
                            {"manifest", manifest_hash},
                            {"oracle", oracle_id},
                            {"seed", cfg.seed},
                            {"grid", cfg.grid}};
    summary.stages.push_back(detail::run_stage(
        out, "place", place_key, {"catalog_placed.json"}, [&](const std::filesystem::path& dir) {
            ArtifactCatalog cat = load_catalog(out / "catalog.json");
            const auto opposing =
                opposing_set(manifest, target.id, Split::train, cfg.search_per_class_cap, cfg.seed);
            ImpactConfig icfg;
            icfg.grid = cfg.grid;
            icfg.shrink_factor = cfg.shrink_factor;
            icfg.opacity = cfg.opacity;
            for (auto* list : {&cat.text, &cat.graphics_text, &cat.graphics_no_text}) {
                for (auto& entry : *list) {
                    const auto result = optimize_placement(entry.artifact, cfg.grid, opposing,
                                                           *oracle, target.id, prompts, icfg);
                    entry.best_placement = result.best;
                    entry.score_map = result.cells;
                }
            }
            save_catalog(cat, dir / "catalog_placed.json");
        }));

    // --- attack ---
    const std::string placed_hash = sha256_hex(read_file_bytes(out / "catalog_placed.json"));
    const json attack_key = {{"catalog", placed_hash}, {"combine", cfg.combine_attacks}};
    summary.stages.push_back(detail::run_stage(
        out, "attack", attack_key, {"attack.json"}, [&](const std::filesystem::path& dir) {
            const ArtifactCatalog cat = load_catalog(out / "catalog_placed.json");
            json singles = json::object();
            std::vector<PlacedArtifact> placed;
            for (ArtifactCategory c : {ArtifactCategory::text, ArtifactCategory::graphics_text,
                                       ArtifactCategory::graphics_no_text}) {
                const auto& entries = cat.category(c);
                if (entries.empty()) continue;
                const auto& top = entries.front();
                AttackSpec single;
                single.target_class = target.id;
                single.grid = cfg.grid;
                single.components.push_back(AttackComponent{top.artifact, *top.best_placement});
                singles[category_name(c)] = single;
                placed.push_back(PlacedArtifact{
                    top.artifact, PlacementSearchResult{*top.best_placement, *top.score_map}});
            }
            json j = {{"schema", "v1"}, {"singles", singles}, {"config", config_echo}};
            if (cfg.combine_attacks && !placed.empty()) {
                j["combined"] = combine(placed, target.id, cfg.grid);
            }
            write_json_file(dir / "attack.json", j);
        }));

    // --- eval ---
    const std::string attack_hash = sha256_hex(read_file_bytes(out / "attack.json"));
    const json eval_key = {{"attack", attack_hash},
                           {"manifest", manifest_hash},
                           {"oracle", oracle_id},
                           {"seed", cfg.seed},
                           {"per_class_cap", cfg.eval_per_class_cap},
                           {"mask_fill", cfg.mask_fill},
                           {"sweeps", json(pipeline_config_json(cfg).at("eval").at("sweeps"))}};
    std::vector<std::string> eval_outputs = {"reports/asr_summary.json"};
    summary.stages.push_back(detail::run_stage(
        out, "eval", eval_key, eval_outputs, [&](const std::filesystem::path& dir) {
            std::filesystem::create_directories(dir / "reports");
            const json attacks = parse_json_file(out / "attack.json");
            const auto test =
                opposing_set(manifest, target.id, Split::test, cfg.eval_per_class_cap, cfg.seed);
            EvalConfig ecfg;
            ecfg.mask_fill = cfg.mask_fill;
            json index = json::object();
            auto run_one = [&](const std::string& tag, const AttackSpec& attack) {
                const ASRReport report = evaluate_asr(attack, test, *oracle, prompts, ecfg);
                json rj = report;
                rj["config"] = config_echo;
                write_json_file(dir / "reports" / ("asr_" + tag + ".json"), rj);
                index[tag] = json{{"asr", report.asr},
                                  {"naive_asr", report.naive_asr},
                                  {"n_total", report.n_total},
                                  {"n_retained", report.n_retained},
                                  {"mean_confidence_delta", report.mean_confidence_delta},
                                  {"file", "reports/asr_" + tag + ".json"}};
                return report;
            };
            std::optional<AttackSpec> sweep_attack;
            for (const auto& [tag, attack_json] : attacks.at("singles").items()) {
                const AttackSpec attack = attack_json.get<AttackSpec>();
                run_one(tag, attack);
                if (!sweep_attack) sweep_attack = attack;
            }
            if (attacks.contains("combined")) {
                const AttackSpec combined = attacks.at("combined").get<AttackSpec>();
                run_one("combined", combined);
            }
            if (sweep_attack) {
                for (const auto& sw : cfg.sweeps) {
                    SweepConfig scfg;
                    scfg.seed = cfg.seed;
                    scfg.grid = cfg.grid;
                    scfg.eval = ecfg;
                    const auto& samples =
                        sw.axis == SweepAxis::train_sample_count
                            ? opposing_set(manifest, target.id, Split::train,
                                           cfg.search_per_class_cap, cfg.seed)
                            : test;
                    const SweepTable table =
                        sweep(*sweep_attack, samples, *oracle, prompts, sw.axis, sw.values, scfg);
                    write_json_file(dir / "reports" /
                                        ("sweep_" + std::string(sweep_axis_name(sw.axis)) + ".json"),
                                    json(table));
                    index["sweep_" + std::string(sweep_axis_name(sw.axis))] =
                        "reports/sweep_" + std::string(sweep_axis_name(sw.axis)) + ".json";
                }
            }
            write_json_file(dir / "reports" / "asr_summary.json",
                            json{{"schema", "v1"}, {"entries", index}, {"config", config_echo}});
            for (const auto& entry : std::filesystem::directory_iterator(dir / "reports")) {
                // publish every report file, not just the summary
                std::filesystem::create_directories(out / "reports");
                std::filesystem::copy_file(entry.path(), out / "reports" / entry.path().filename(),
                                           std::filesystem::copy_options::overwrite_existing);
            }
        }));

    // --- mitigate (optional) ---
    if (cfg.mitigation_enabled) {
        const json mit_key = {{"attack", sha256_hex(read_file_bytes(out / "attack.json"))},
                              {"manifest", manifest_hash},
                              {"oracle", oracle_id},
                              {"seed", cfg.seed},
                              {"captioner", cfg.captioner},
                              {"blind", cfg.mitigation_blind}};
        summary.stages.push_back(detail::run_stage(
            out, "mitigate", mit_key, {"reports/mitigation.json"},
            [&](const std::filesystem::path& dir) {
                std::filesystem::create_directories(dir / "reports");
                const json attacks = parse_json_file(out / "attack.json");
                AttackSpec attack;
                if (attacks.contains("combined")) {
                    attack = attacks.at("combined").get<AttackSpec>();
                } else {
                    const auto& singles = attacks.at("singles");
                    if (singles.empty()) fail(ErrorKind::stage, "mitigate: no attack available");
                    attack = singles.begin().value().get<AttackSpec>();
                }
                const auto test =
                    opposing_set(manifest, target.id, Split::test, cfg.eval_per_class_cap, cfg.seed);
                EvalConfig ecfg;
                ecfg.mask_fill = cfg.mask_fill;
                std::vector<ArtifactDescription> descriptions;
                if (cfg.mitigation_blind) {
                    const auto detector = make_text_detector(cfg.detector);
                    if (detector) {
                        descriptions = blind_descriptions(attack, test, *detector, cfg.ocr_threshold);
                    }
                } else {
                    const auto captioner = make_captioner(cfg.captioner);
                    for (const auto& comp : attack.components) {
                        descriptions.push_back(describe_artifact(comp.artifact, captioner.get()));
                    }
                }
                const MitigationReport report =
                    evaluate_mitigation(attack, test, *oracle, prompts, descriptions, ecfg);
                json rj = report;
                rj["config"] = config_echo;
                rj["blind"] = cfg.mitigation_blind;
                rj["generative_instruction"] = build_generative_instruction();
                write_json_file(dir / "reports" / "mitigation.json", rj);
                std::filesystem::create_directories(out / "reports");
            }));
    }

    // --- run manifest: stages + stable output files with content hashes ---
    json files = json::array();
    auto add_file = [&](const std::filesystem::path& p) {
        files.push_back(json{{"path", std::filesystem::relative(p, out).generic_string()},
                             {"sha256", sha256_hex(read_file_bytes(p))}});
    };
    for (const char* name : {"candidates.json", "records.json", "catalog.json",
                             "catalog_placed.json", "attack.json"}) {
        add_file(out / name);
    }
    if (std::filesystem::exists(out / "reports")) {
        std::vector<std::filesystem::path> report_files;
        for (const auto& entry : std::filesystem::directory_iterator(out / "reports")) {
            report_files.push_back(entry.path());
        }
        std::sort(report_files.begin(), report_files.end());
        for (const auto& p : report_files) add_file(p);
    }
    json stages = json::array();
    for (const auto& st : summary.stages) {
        stages.push_back(json{{"name", st.name}, {"key", st.key}});
    }
    const json run_manifest = {{"schema", "v1"},
                               {"code_version", kCodeVersion},
                               {"config", config_echo},
                               {"stages", stages},
                               {"files", files}};
    summary.manifest_path = out / "run_manifest.json";
    write_json_file(summary.manifest_path, run_manifest);
    return summary;
}

}  // namespace webart
