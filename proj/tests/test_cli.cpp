// Exercises the installed CLI binary end to end over a synthetic workspace:
// every subcommand, plus the documented exit codes.

#include "doctest.h"

#include <cstdlib>
#include <sys/wait.h>

#include "webart/catalog.hpp"
#include "webart/pipeline.hpp"

#include "support.hpp"

using namespace webart;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(WEBART_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

struct CliWorkspace {
    test::TempDir tmp{"cli"};
    Image trigger = test::checker_patch(6, Rgb{250, 0, 250}, Rgb{0, 250, 250});
    std::filesystem::path manifest;

    CliWorkspace() {
        std::filesystem::create_directories(tmp.path() / "corpus");
        Rng rng(3);
        for (int i = 0; i < 5; ++i) {
            save_image(tmp.path() / "corpus" / ("d" + std::to_string(i) + ".ppm"),
                       test::random_image(6, 6, rng));
        }
        save_image(tmp.path() / "corpus" / "trigger.ppm", trigger);
        manifest = test::write_world_dataset(tmp.path() / "data", 4, 3, 2);

        json colors = json::array();
        for (const auto& c : test::world_colors()) colors.push_back(c);
        write_json_file(tmp.path() / "oracle.json",
                        json{{"kind", "synthetic"},
                             {"spec",
                              {{"base_colors", colors},
                               {"triggers",
                                json::array({{{"class", 1}, {"pattern", json(trigger)}}})}}}});
        write_json_file(tmp.path() / "retrieval.json",
                        json{{"kind", "hash-embedding"}, {"dim", 16}, {"seed", 3}});
    }

    std::string p(const std::string& rel) const { return (tmp.path() / rel).string(); }
};

}  // namespace

TEST_CASE("cli: mine -> score -> place -> attack -> eval -> report chain") {
    CliWorkspace ws;
    const std::string shrink = format_double(64.0 / 6.0);

    CHECK(run_cli("mine --corpus " + ws.p("corpus") + " --oracle " + ws.p("retrieval.json") +
                  " --manifest " + ws.manifest.string() + " --keep-fraction 1.0 --out " +
                  ws.p("candidates.json")) == 0);
    CHECK(std::filesystem::exists(ws.p("candidates.json")));

    CHECK(run_cli("score --target class1 --candidates " + ws.p("candidates.json") +
                  " --manifest " + ws.manifest.string() + " --oracle " + ws.p("oracle.json") +
                  " --seed 7 --shrink " + shrink + " --out " + ws.p("records.json")) == 0);

    CHECK(run_cli("place --records " + ws.p("records.json") + " --manifest " +
                  ws.manifest.string() + " --oracle " + ws.p("oracle.json") +
                  " --seed 7 --top-s 3 --shrink " + shrink + " --out " + ws.p("catalog.json")) == 0);
    const ArtifactCatalog catalog = load_catalog(ws.p("catalog.json"));
    REQUIRE_FALSE(catalog.graphics_no_text.empty());
    CHECK(catalog.graphics_no_text[0].artifact.id == "g:trigger.ppm");
    CHECK(catalog.graphics_no_text[0].record.score == 1.0);

    CHECK(run_cli("attack --catalog " + ws.p("catalog.json") + " --out " + ws.p("attack.json")) ==
          0);

    CHECK(run_cli("eval --attack " + ws.p("attack.json") + " --manifest " + ws.manifest.string() +
                  " --oracle " + ws.p("oracle.json") + " --seed 7 --out " + ws.p("report.json") +
                  " --csv " + ws.p("report.csv")) == 0);
    const json report = parse_json_file(ws.p("report.json"));
    CHECK(report.at("asr").get<double>() == 1.0);
    CHECK(std::filesystem::exists(ws.p("report.csv")));

    CHECK(run_cli("sweep --attack " + ws.p("attack.json") + " --manifest " +
                  ws.manifest.string() + " --oracle " + ws.p("oracle.json") +
                  " --axis opacity --values 0.0,1.0 --seed 7 --out-dir " + ws.p("sweeps")) == 0);
    CHECK(std::filesystem::exists(ws.p("sweeps/sweep_opacity.json")));
    CHECK(std::filesystem::exists(ws.p("sweeps/sweep_opacity.csv")));
    CHECK(std::filesystem::exists(ws.p("sweeps/sweep_opacity.bmp")));

    CHECK(run_cli("transfer --catalog " + ws.p("catalog.json") + " --catalog " +
                  ws.p("catalog.json") + " --oracle " + ws.p("oracle.json") + " --oracle " +
                  ws.p("oracle.json") + " --manifest " + ws.manifest.string() +
                  " --seed 7 --top-s 1 --out-dir " + ws.p("transfer")) == 0);
    const json matrix = parse_json_file(ws.p("transfer/transfer.json"));
    CHECK(matrix.at("cells").at("graphics-no-text").at(0).at(0).get<double>() == 1.0);
    CHECK(std::filesystem::exists(ws.p("transfer/transfer.csv")));
    CHECK(std::filesystem::exists(ws.p("transfer/transfer_graphics-no-text.bmp")));

    CHECK(run_cli("mitigate --attack " + ws.p("attack.json") + " --manifest " +
                  ws.manifest.string() + " --oracle " + ws.p("oracle.json") +
                  " --seed 7 --out " + ws.p("mitigation.json")) == 0);
    const json mitigation = parse_json_file(ws.p("mitigation.json"));
    CHECK(mitigation.contains("undefended"));
    CHECK(mitigation.contains("defended"));
}

TEST_CASE("cli: pipeline + report subcommands") {
    CliWorkspace ws;
    json colors = json::array();
    for (const auto& c : test::world_colors()) colors.push_back(c);
    const json cfg = {
        {"seed", 7},
        {"corpus", "corpus"},
        {"manifest", "data/manifest.tsv"},
        {"output_dir", "out"},
        {"oracle",
         {{"kind", "synthetic"},
          {"spec",
           {{"base_colors", colors},
            {"triggers", json::array({{{"class", 1}, {"pattern", json(ws.trigger)}}})}}}}},
        {"retrieval_oracle", {{"kind", "hash-embedding"}, {"dim", 16}, {"seed", 3}}},
        {"mining", {{"prompts", json::array({"a photo of a graphic"})}, {"keep_fraction", 1.0}}},
        {"search",
         {{"target_class", "class1"}, {"top_s", 3}, {"shrink_factor", 64.0 / 6.0}}},
        {"eval", {{"per_class_cap", 10}}}};
    write_json_file(ws.tmp.path() / "config.json", cfg);

    CHECK(run_cli("pipeline --config " + ws.p("config.json")) == 0);
    CHECK(std::filesystem::exists(ws.p("out/run_manifest.json")));
    CHECK(run_cli("report --run-dir " + ws.p("out")) == 0);
    CHECK(std::filesystem::exists(ws.p("out/summary.csv")));
}

TEST_CASE("cli: exit codes distinguish validation from stage failures") {
    CliWorkspace ws;
    // validation error (2): manifest does not exist
    CHECK(run_cli("score --target class1 --candidates nope.json --manifest missing.tsv "
                  "--oracle " +
                  ws.p("oracle.json") + " --seed 1 --out x.json") == 2);
    // validation error (2): config missing seed
    write_json_file(ws.tmp.path() / "noseed.json",
                    json{{"corpus", "corpus"}, {"manifest", "data/manifest.tsv"},
                         {"output_dir", "out"}, {"oracle", json{{"kind", "hash-embedding"}}},
                         {"search", {{"target_class", "class1"}}}});
    CHECK(run_cli("pipeline --config " + ws.p("noseed.json")) == 2);
    // oracle/stage failure (3): dead remote endpoint at eval time
    write_json_file(ws.tmp.path() / "dead.json",
                    json{{"kind", "generative"},
                         {"endpoint", "http://127.0.0.1:1"},
                         {"identity", "down"},
                         {"timeout_s", 1}});
    write_json_file(ws.tmp.path() / "fake_attack.json", [&] {
        AttackSpec attack;
        attack.target_class = 1;
        attack.components.push_back(
            AttackComponent{make_graphics_artifact("g", ws.trigger, {}),
                            CellPlacement{GridCell{0, 0}, 64.0 / 6.0, 1.0}});
        return json{{"schema", "v1"}, {"singles", {{"graphics-no-text", attack}}}};
    }());
    CHECK(run_cli("eval --attack " + ws.p("fake_attack.json") + " --manifest " +
                  ws.manifest.string() + " --oracle " + ws.p("dead.json") +
                  " --which graphics-no-text --seed 1 --out " + ws.p("x.json")) == 3);
    // CLI parse errors are nonzero as well
    CHECK(run_cli("definitely-not-a-subcommand") != 0);
}
