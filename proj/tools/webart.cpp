// Command-line front end. Subcommands mirror the pipeline stages so each can
// run standalone on files, plus `pipeline` for the cached end-to-end run.
// Exit codes: 0 success, 2 validation/config error, 3 stage failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "webart/catalog.hpp"
#include "webart/eval.hpp"
#include "webart/mining.hpp"
#include "webart/mitigation.hpp"
#include "webart/oracle_config.hpp"
#include "webart/pipeline.hpp"
#include "webart/report.hpp"
#include "webart/search.hpp"

namespace fs = std::filesystem;
using namespace webart;

namespace {

std::string default_cache_dir() {
    if (const char* env = std::getenv("WEBART_CACHE")) return env;
    return "";
}

Rgb parse_rgb(const std::string& s) {
    const auto parts = split(s, ',');
    if (parts.size() != 3) fail(ErrorKind::validation, "expected r,g,b: got '" + s + "'");
    return Rgb{static_cast<std::uint8_t>(std::stoi(parts[0])),
               static_cast<std::uint8_t>(std::stoi(parts[1])),
               static_cast<std::uint8_t>(std::stoi(parts[2]))};
}

ClassLabel resolve_target(const DatasetManifest& manifest, const std::string& target) {
    try {
        return manifest.class_by_id(std::stoi(target));
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        return manifest.class_by_name(target);
    }
}

void write_asr_csv(const ASRReport& report, const fs::path& path) {
    std::string csv = "sample_id,label,clean_pred,masked_pred,attacked_pred,retained,success,"
                      "confidence_delta\n";
    for (const auto& s : report.per_sample) {
        csv += s.sample_id + "," + std::to_string(s.label) + "," + std::to_string(s.clean_pred) +
               "," + std::to_string(s.masked_pred) + "," + std::to_string(s.attacked_pred) + "," +
               (s.retained ? "1" : "0") + "," + (s.success ? "1" : "0") + "," +
               format_double(s.confidence_delta) + "\n";
    }
    write_file_bytes(path, csv);
}

struct MineArgs {
    std::string corpus, oracle_cfg, manifest, classes, prompts_file, out;
    std::vector<std::string> prompts;
    std::string detector_cfg = R"({"kind":"builtin"})";
    double keep_fraction = 0.01;
    double ocr_threshold = kDefaultOcrThreshold;
    std::string cache = default_cache_dir();
};

int cmd_mine(const MineArgs& a) {
    MiningConfig cfg;
    cfg.keep_fraction = a.keep_fraction;
    cfg.ocr_threshold = a.ocr_threshold;
    if (!a.classes.empty()) {
        for (const auto& name : split(a.classes, ',')) {
            if (!trim(name).empty()) cfg.class_names.push_back(trim(name));
        }
    } else if (!a.manifest.empty()) {
        cfg.class_names = load_manifest(a.manifest).class_names();
    } else {
        fail(ErrorKind::validation, "mine: pass --classes or --manifest for the name filter");
    }
    if (!a.prompts_file.empty()) {
        for (const auto& line : split(read_file_bytes(a.prompts_file), '\n')) {
            const std::string t = trim(line);
            if (!t.empty()) cfg.prompts.push_back(t);
        }
    }
    for (const auto& p : a.prompts) cfg.prompts.push_back(p);
    if (cfg.prompts.empty()) cfg.prompts.push_back("a photo of a graphic");

    const auto oracle = load_oracle(a.oracle_cfg);
    CorpusReader corpus = CorpusReader::open(a.corpus);
    const EmbeddingCache cache{fs::path(a.cache)};
    const auto candidates = retrieve_candidates(corpus, cfg, *oracle, cache);
    const auto detector = make_text_detector(json::parse(a.detector_cfg));
    const MiningResult mined = categorize(candidates, cfg.class_names, detector.get(),
                                          cfg.ocr_threshold);
    write_json_file(a.out, json(mined));
    std::printf("mined %zu text / %zu graphics-text / %zu graphics-no-text -> %s%s\n",
                mined.text.size(), mined.graphics_text.size(), mined.graphics_no_text.size(),
                a.out.c_str(), mined.degraded_ocr ? " (degraded: no OCR)" : "");
    return 0;
}

struct ScoreArgs {
    std::string target, candidates, manifest, oracle_cfg, out;
    std::uint64_t seed = 0;
    std::string split = "train";
    std::size_t per_class_cap = 32;
    std::string grid = "3x3";
    double shrink = 10.0;
    double opacity = 1.0;
};

int cmd_score(const ScoreArgs& a) {
    const DatasetManifest manifest = load_manifest(a.manifest);
    const ClassLabel target = resolve_target(manifest, a.target);
    const auto oracle = load_oracle(a.oracle_cfg);
    const ClassPromptSet prompts = make_prompts(manifest.classes);
    const MiningResult mined = parse_json_file(a.candidates).get<MiningResult>();
    const auto opposing =
        opposing_set(manifest, target.id, parse_split(a.split), a.per_class_cap, a.seed);
    ImpactConfig icfg;
    icfg.grid = parse_grid(a.grid);
    icfg.shrink_factor = a.shrink;
    icfg.opacity = a.opacity;
    std::vector<ScoredArtifact> scored;
    for (const auto& artifact : all_artifacts(mined)) {
        scored.push_back(ScoredArtifact{
            artifact, impact_score(artifact, opposing, *oracle, target.id, prompts, a.seed, icfg)});
    }
    write_json_file(a.out, json{{"schema", "v1"},
                                {"target_class", target},
                                {"split", a.split},
                                {"seed", a.seed},
                                {"records", scored}});
    std::printf("scored %zu artifacts on %zu opposing samples -> %s\n", scored.size(),
                opposing.size(), a.out.c_str());
    return 0;
}

struct PlaceArgs {
    std::string records, manifest, oracle_cfg, out;
    std::uint64_t seed = 0;
    std::string split = "train";
    std::size_t per_class_cap = 32;
    std::size_t top_s = 10;
    std::string grid = "3x3";
    double shrink = 10.0;
    double opacity = 1.0;
};

int cmd_place(const PlaceArgs& a) {
    const DatasetManifest manifest = load_manifest(a.manifest);
    const json records_json = parse_json_file(a.records);
    const ClassLabel target = records_json.at("target_class").get<ClassLabel>();
    const auto scored = records_json.at("records").get<std::vector<ScoredArtifact>>();
    const auto oracle = load_oracle(a.oracle_cfg);
    const ClassPromptSet prompts = make_prompts(manifest.classes);
    const PlacementGrid grid = parse_grid(a.grid);
    const auto opposing =
        opposing_set(manifest, target.id, parse_split(a.split), a.per_class_cap, a.seed);
    ImpactConfig icfg;
    icfg.grid = grid;
    icfg.shrink_factor = a.shrink;
    icfg.opacity = a.opacity;

    const RankedSelection ranked = rank_select(scored, a.top_s);
    ArtifactCatalog cat = build_catalog(target, ranked, grid, a.seed,
                                        oracle->descriptor().identity, parse_split(a.split));
    for (auto* list : {&cat.text, &cat.graphics_text, &cat.graphics_no_text}) {
        for (auto& entry : *list) {
            const auto result =
                optimize_placement(entry.artifact, grid, opposing, *oracle, target.id, prompts, icfg);
            entry.best_placement = result.best;
            entry.score_map = result.cells;
        }
    }
    save_catalog(cat, a.out);
    std::printf("placed top-%zu per category -> %s\n", a.top_s, a.out.c_str());
    return 0;
}

struct AttackArgs {
    std::string catalog, out;
    bool combine_flag = true;
};

int cmd_attack(const AttackArgs& a) {
    const ArtifactCatalog cat = load_catalog(a.catalog);
    json singles = json::object();
    std::vector<PlacedArtifact> placed;
    for (ArtifactCategory c : {ArtifactCategory::text, ArtifactCategory::graphics_text,
                               ArtifactCategory::graphics_no_text}) {
        const auto& entries = cat.category(c);
        if (entries.empty()) continue;
        const auto& top = entries.front();
        if (!top.best_placement) {
            fail(ErrorKind::validation,
                 "attack: catalog entry '" + top.artifact.id + "' has no optimized placement");
        }
        AttackSpec single;
        single.target_class = cat.target_class.id;
        single.grid = cat.grid;
        single.components.push_back(AttackComponent{top.artifact, *top.best_placement});
        singles[category_name(c)] = single;
        placed.push_back(PlacedArtifact{
            top.artifact,
            PlacementSearchResult{*top.best_placement,
                                  top.score_map.value_or(std::vector<CellScore>{})}});
    }
    if (singles.empty()) fail(ErrorKind::validation, "attack: catalog has no entries");
    json out = {{"schema", "v1"}, {"singles", singles}};
    if (a.combine_flag && !placed.empty()) {
        out["combined"] = combine(placed, cat.target_class.id, cat.grid);
    }
    write_json_file(a.out, out);
    std::printf("attack specs -> %s\n", a.out.c_str());
    return 0;
}

struct EvalArgs {
    std::string attack, manifest, oracle_cfg, out, csv;
    std::string which = "combined";
    std::uint64_t seed = 0;
    std::size_t per_class_cap = 32;
    std::string mask_fill = "128,128,128";
};

AttackSpec pick_attack(const json& attacks, const std::string& which) {
    if (which == "combined") {
        if (!attacks.contains("combined")) {
            fail(ErrorKind::validation, "attack file has no combined spec; pass --which <category>");
        }
        return attacks.at("combined").get<AttackSpec>();
    }
    const auto& singles = attacks.at("singles");
    if (!singles.contains(which)) {
        fail(ErrorKind::validation, "attack file has no '" + which + "' spec");
    }
    return singles.at(which).get<AttackSpec>();
}

int cmd_eval(const EvalArgs& a) {
    const DatasetManifest manifest = load_manifest(a.manifest);
    const auto oracle = load_oracle(a.oracle_cfg);
    const ClassPromptSet prompts = make_prompts(manifest.classes);
    const AttackSpec attack = pick_attack(parse_json_file(a.attack), a.which);
    const auto test =
        opposing_set(manifest, attack.target_class, Split::test, a.per_class_cap, a.seed);
    EvalConfig cfg;
    cfg.mask_fill = parse_rgb(a.mask_fill);
    const ASRReport report = evaluate_asr(attack, test, *oracle, prompts, cfg);
    json rj = report;
    rj["seed"] = a.seed;  // sample-selection seed, recorded for reproducibility
    write_json_file(a.out, rj);
    if (!a.csv.empty()) write_asr_csv(report, a.csv);
    std::printf("strict ASR %.4f (naive %.4f), retained %d/%d -> %s\n", report.asr,
                report.naive_asr, report.n_retained, report.n_total, a.out.c_str());
    return 0;
}

struct TransferArgs {
    std::vector<std::string> catalogs, oracle_cfgs;
    std::string manifest, out_dir;
    std::uint64_t seed = 0;
    std::size_t per_class_cap = 32;
    std::size_t top_s = 10;
    std::string mask_fill = "128,128,128";
};

int cmd_transfer(const TransferArgs& a) {
    const DatasetManifest manifest = load_manifest(a.manifest);
    const ClassPromptSet prompts = make_prompts(manifest.classes);
    std::vector<ArtifactCatalog> catalogs;
    for (const auto& p : a.catalogs) catalogs.push_back(load_catalog(p));
    std::vector<std::shared_ptr<ClassifierOracle>> owners;
    std::vector<const ClassifierOracle*> oracles;
    for (const auto& p : a.oracle_cfgs) {
        owners.push_back(load_oracle(p));
        oracles.push_back(owners.back().get());
    }
    const auto test = opposing_set(manifest, catalogs.at(0).target_class.id, Split::test,
                                   a.per_class_cap, a.seed);
    TransferConfig cfg;
    cfg.top_s = a.top_s;
    cfg.eval.mask_fill = parse_rgb(a.mask_fill);
    const TransferMatrix matrix = transfer_eval(catalogs, oracles, test, prompts, cfg);

    fs::create_directories(a.out_dir);
    const fs::path out_dir(a.out_dir);
    json mj = matrix;
    mj["seed"] = a.seed;
    write_json_file(out_dir / "transfer.json", mj);
    std::string csv = "category,source,eval,mean_asr\n";
    for (const auto& [cat, grid] : matrix.cells) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            for (std::size_t jx = 0; jx < grid[i].size(); ++jx) {
                csv += cat + "," + matrix.source_identities[i] + "," + matrix.eval_identities[jx] +
                       "," + format_double(grid[i][jx]) + "\n";
            }
        }
        save_image(out_dir / ("transfer_" + cat + ".bmp"),
                   plot::heatmap(grid, "transfer " + cat, matrix.source_identities,
                                 matrix.eval_identities));
    }
    write_file_bytes(out_dir / "transfer.csv", csv);
    std::printf("transfer matrix -> %s\n", (out_dir / "transfer.json").string().c_str());
    return 0;
}

struct SweepArgs {
    std::string attack, manifest, oracle_cfg, out_dir, axis = "shrink_factor";
    std::string which = "combined";
    std::string values;
    std::uint64_t seed = 0;
    std::size_t per_class_cap = 32;
    std::string grid = "3x3";
    std::string mask_fill = "128,128,128";
};

int cmd_sweep(const SweepArgs& a) {
    const DatasetManifest manifest = load_manifest(a.manifest);
    const auto oracle = load_oracle(a.oracle_cfg);
    const ClassPromptSet prompts = make_prompts(manifest.classes);
    const AttackSpec attack = pick_attack(parse_json_file(a.attack), a.which);
    const SweepAxis axis = parse_sweep_axis(a.axis);
    std::vector<double> values;
    for (const auto& v : split(a.values, ',')) {
        if (!trim(v).empty()) values.push_back(std::stod(v));
    }
    const auto samples =
        axis == SweepAxis::train_sample_count
            ? opposing_set(manifest, attack.target_class, Split::train, a.per_class_cap, a.seed)
            : opposing_set(manifest, attack.target_class, Split::test, a.per_class_cap, a.seed);
    SweepConfig cfg;
    cfg.seed = a.seed;
    cfg.grid = parse_grid(a.grid);
    cfg.eval.mask_fill = parse_rgb(a.mask_fill);
    const SweepTable table = sweep(attack, samples, *oracle, prompts, axis, values, cfg);

    fs::create_directories(a.out_dir);
    const fs::path out_dir(a.out_dir);
    json tj = table;
    tj["seed"] = a.seed;
    write_json_file(out_dir / ("sweep_" + table.axis + ".json"), tj);
    std::string csv = "value," + table.metric_name + ",n\n";
    plot::Series series;
    series.name = table.metric_name;
    for (const auto& row : table.rows) {
        csv += format_double(row.value) + "," + format_double(row.metric) + "," +
               std::to_string(row.n) + "\n";
        series.x.push_back(row.value);
        series.y.push_back(row.metric);
    }
    write_file_bytes(out_dir / ("sweep_" + table.axis + ".csv"), csv);
    save_image(out_dir / ("sweep_" + table.axis + ".bmp"),
               plot::line_plot({series}, "sweep " + table.axis, table.axis, table.metric_name));
    std::printf("sweep %s over %zu values -> %s\n", table.axis.c_str(), table.rows.size(),
                out_dir.string().c_str());
    return 0;
}

struct MitigateArgs {
    std::string attack, manifest, oracle_cfg, out;
    std::string captioner_cfg = R"({"kind":"color"})";
    std::string detector_cfg = R"({"kind":"builtin"})";
    std::string which = "combined";
    bool blind = false;
    std::uint64_t seed = 0;
    std::size_t per_class_cap = 32;
    std::string mask_fill = "128,128,128";
};

int cmd_mitigate(const MitigateArgs& a) {
    const DatasetManifest manifest = load_manifest(a.manifest);
    const auto oracle = load_oracle(a.oracle_cfg);
    const ClassPromptSet prompts = make_prompts(manifest.classes);
    const AttackSpec attack = pick_attack(parse_json_file(a.attack), a.which);
    const auto test =
        opposing_set(manifest, attack.target_class, Split::test, a.per_class_cap, a.seed);
    EvalConfig cfg;
    cfg.mask_fill = parse_rgb(a.mask_fill);
    std::vector<ArtifactDescription> descriptions;
    if (a.blind) {
        const auto detector = make_text_detector(json::parse(a.detector_cfg));
        if (detector) descriptions = blind_descriptions(attack, test, *detector);
    } else {
        const auto captioner = make_captioner(json::parse(a.captioner_cfg));
        for (const auto& comp : attack.components) {
            descriptions.push_back(describe_artifact(comp.artifact, captioner.get()));
        }
    }
    const MitigationReport report =
        evaluate_mitigation(attack, test, *oracle, prompts, descriptions, cfg);
    json j = report;
    j["seed"] = a.seed;
    j["blind"] = a.blind;
    j["generative_instruction"] = build_generative_instruction();
    write_json_file(a.out, j);
    std::printf("undefended %.4f -> defended %.4f (reduction %.4f abs / %.4f rel) -> %s\n",
                report.undefended.asr, report.defended.asr, report.absolute_reduction,
                report.relative_reduction, a.out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"web-artifact attack search, evaluation, and mitigation toolkit"};
    app.require_subcommand(1);

    MineArgs mine_args;
    auto* mine = app.add_subcommand("mine", "retrieve and categorize candidate artifacts");
    mine->add_option("--corpus", mine_args.corpus)->required();
    mine->add_option("--oracle", mine_args.oracle_cfg, "oracle config JSON file")->required();
    mine->add_option("--manifest", mine_args.manifest, "manifest supplying the class-name filter");
    mine->add_option("--classes", mine_args.classes, "comma-separated class names to filter");
    mine->add_option("--prompts-file", mine_args.prompts_file);
    mine->add_option("--prompt", mine_args.prompts);
    mine->add_option("--keep-fraction", mine_args.keep_fraction);
    mine->add_option("--ocr-threshold", mine_args.ocr_threshold);
    mine->add_option("--detector", mine_args.detector_cfg, "detector config JSON string");
    mine->add_option("--cache", mine_args.cache, "embedding cache dir (default $WEBART_CACHE)");
    mine->add_option("--out", mine_args.out)->required();

    ScoreArgs score_args;
    auto* score = app.add_subcommand("score", "impact-score candidates on opposing images");
    score->add_option("--target", score_args.target)->required();
    score->add_option("--candidates", score_args.candidates)->required();
    score->add_option("--manifest", score_args.manifest)->required();
    score->add_option("--oracle", score_args.oracle_cfg)->required();
    score->add_option("--seed", score_args.seed)->required();
    score->add_option("--split", score_args.split);
    score->add_option("--per-class-cap", score_args.per_class_cap);
    score->add_option("--grid", score_args.grid);
    score->add_option("--shrink", score_args.shrink);
    score->add_option("--opacity", score_args.opacity);
    score->add_option("--out", score_args.out)->required();

    PlaceArgs place_args;
    auto* place = app.add_subcommand("place", "rank artifacts and optimize grid placement");
    place->add_option("--records", place_args.records)->required();
    place->add_option("--manifest", place_args.manifest)->required();
    place->add_option("--oracle", place_args.oracle_cfg)->required();
    place->add_option("--seed", place_args.seed)->required();
    place->add_option("--split", place_args.split);
    place->add_option("--per-class-cap", place_args.per_class_cap);
    place->add_option("--top-s", place_args.top_s);
    place->add_option("--grid", place_args.grid);
    place->add_option("--shrink", place_args.shrink);
    place->add_option("--opacity", place_args.opacity);
    place->add_option("--out", place_args.out)->required();

    AttackArgs attack_args;
    auto* attack = app.add_subcommand("attack", "build single and combined attack specs");
    attack->add_option("--catalog", attack_args.catalog)->required();
    attack->add_flag("--combine,!--no-combine", attack_args.combine_flag);
    attack->add_option("--out", attack_args.out)->required();

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "masking-validated ASR on the test split");
    eval->add_option("--attack", eval_args.attack)->required();
    eval->add_option("--manifest", eval_args.manifest)->required();
    eval->add_option("--oracle", eval_args.oracle_cfg)->required();
    eval->add_option("--which", eval_args.which, "combined | text | graphics-text | graphics-no-text");
    eval->add_option("--seed", eval_args.seed);
    eval->add_option("--per-class-cap", eval_args.per_class_cap);
    eval->add_option("--mask-fill", eval_args.mask_fill);
    eval->add_option("--out", eval_args.out)->required();
    eval->add_option("--csv", eval_args.csv);

    TransferArgs transfer_args;
    auto* transfer = app.add_subcommand("transfer", "cross-oracle transfer matrix");
    transfer->add_option("--catalog", transfer_args.catalogs)->required();
    transfer->add_option("--oracle", transfer_args.oracle_cfgs)->required();
    transfer->add_option("--manifest", transfer_args.manifest)->required();
    transfer->add_option("--seed", transfer_args.seed);
    transfer->add_option("--per-class-cap", transfer_args.per_class_cap);
    transfer->add_option("--top-s", transfer_args.top_s);
    transfer->add_option("--mask-fill", transfer_args.mask_fill);
    transfer->add_option("--out-dir", transfer_args.out_dir)->required();

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "size/opacity/sample-count ablation");
    sweep_cmd->add_option("--attack", sweep_args.attack)->required();
    sweep_cmd->add_option("--manifest", sweep_args.manifest)->required();
    sweep_cmd->add_option("--oracle", sweep_args.oracle_cfg)->required();
    sweep_cmd->add_option("--which", sweep_args.which);
    sweep_cmd->add_option("--axis", sweep_args.axis,
                          "shrink_factor | opacity | train_sample_count");
    sweep_cmd->add_option("--values", sweep_args.values, "comma-separated, ascending")->required();
    sweep_cmd->add_option("--seed", sweep_args.seed);
    sweep_cmd->add_option("--per-class-cap", sweep_args.per_class_cap);
    sweep_cmd->add_option("--grid", sweep_args.grid);
    sweep_cmd->add_option("--mask-fill", sweep_args.mask_fill);
    sweep_cmd->add_option("--out-dir", sweep_args.out_dir)->required();

    MitigateArgs mitigate_args;
    auto* mitigate = app.add_subcommand("mitigate", "artifact-aware prompting defense");
    mitigate->add_option("--attack", mitigate_args.attack)->required();
    mitigate->add_option("--manifest", mitigate_args.manifest)->required();
    mitigate->add_option("--oracle", mitigate_args.oracle_cfg)->required();
    mitigate->add_option("--captioner", mitigate_args.captioner_cfg, "captioner config JSON string");
    mitigate->add_option("--detector", mitigate_args.detector_cfg);
    mitigate->add_option("--which", mitigate_args.which);
    mitigate->add_flag("--blind", mitigate_args.blind, "derive descriptions from OCR, not the attack");
    mitigate->add_option("--seed", mitigate_args.seed);
    mitigate->add_option("--per-class-cap", mitigate_args.per_class_cap);
    mitigate->add_option("--mask-fill", mitigate_args.mask_fill);
    mitigate->add_option("--out", mitigate_args.out)->required();

    std::string report_dir;
    auto* report = app.add_subcommand("report", "render plots and summary tables for a run");
    report->add_option("--run-dir", report_dir)->required();

    std::string pipeline_cfg;
    auto* pipeline = app.add_subcommand("pipeline", "cached end-to-end run from a config file");
    pipeline->add_option("--config", pipeline_cfg)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (mine->parsed()) return cmd_mine(mine_args);
        if (score->parsed()) return cmd_score(score_args);
        if (place->parsed()) return cmd_place(place_args);
        if (attack->parsed()) return cmd_attack(attack_args);
        if (eval->parsed()) return cmd_eval(eval_args);
        if (transfer->parsed()) return cmd_transfer(transfer_args);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_args);
        if (mitigate->parsed()) return cmd_mitigate(mitigate_args);
        if (report->parsed()) {
            const ReportOutputs outputs = write_reports(report_dir);
            for (const auto& w : outputs.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
            std::printf("wrote %zu report files under %s\n", outputs.files.size(),
                        report_dir.c_str());
            return 0;
        }
        if (pipeline->parsed()) {
            const PipelineConfig cfg = load_pipeline_config(pipeline_cfg);
            const RunSummary run = run_pipeline(cfg);
            for (const auto& st : run.stages) {
                std::printf("stage %-8s %s %s\n", st.name.c_str(), st.key.c_str(),
                            st.cached ? "(cached)" : "");
            }
            std::printf("run manifest: %s\n", run.manifest_path.string().c_str());
            return 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        // Bad inputs (including unreadable input files) are usage errors;
        // oracle and stage failures are runtime failures.
        const bool usage = e.kind() == ErrorKind::validation || e.kind() == ErrorKind::parse ||
                           e.kind() == ErrorKind::io;
        return usage ? 2 : 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
