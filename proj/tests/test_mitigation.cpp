#include "doctest.h"

#include "webart/mitigation.hpp"
#include "webart/synthetic.hpp"

#include "support.hpp"

using namespace webart;

namespace {

ImageSample opposing_test_sample(int label, const std::string& id) {
    ImageSample s;
    s.image = test::class_image(label);
    s.label = ClassLabel{label, "class" + std::to_string(label)};
    s.split = Split::test;
    s.source_path = id;
    return s;
}

}  // namespace

TEST_CASE("the dog/cat aware prompt reproduces the reference string exactly") {
    ClassPromptSet base;
    base.prompts = {"a photo of a dog"};
    ArtifactDescription d;
    d.artifact_id = "t0";
    d.kind = DescriptionKind::verbatim_text;
    d.text = "cat";
    const auto aware = build_aware_prompts(base, {d});
    CHECK(aware.prompts[0] == "a photo of a dog with \"cat\" written on it");
}

TEST_CASE("caption descriptions use the non-quoted clause") {
    ClassPromptSet base;
    base.prompts = {"a photo of a dog"};
    ArtifactDescription d;
    d.artifact_id = "g0";
    d.kind = DescriptionKind::caption;
    d.text = "a yellow sign with a black hazard symbol";
    const auto aware = build_aware_prompts(base, {d});
    CHECK(aware.prompts[0] ==
          "a photo of a dog with a yellow sign with a black hazard symbol on it");
}

TEST_CASE("empty description list leaves prompts untouched") {
    ClassPromptSet base = make_prompts(test::world_classes(2));
    const auto aware = build_aware_prompts(base, {});
    CHECK(aware == base);
}

TEST_CASE("multiple descriptions join with ' and ' in artifact-id order") {
    ClassPromptSet base;
    base.prompts = {"a photo of a dog"};
    ArtifactDescription d1;
    d1.artifact_id = "z-last";
    d1.kind = DescriptionKind::verbatim_text;
    d1.text = "cat";
    ArtifactDescription d2;
    d2.artifact_id = "a-first";
    d2.kind = DescriptionKind::caption;
    d2.text = "a red logo";
    const auto aware = build_aware_prompts(base, {d1, d2});
    CHECK(aware.prompts[0] ==
          "a photo of a dog with a red logo on it and with \"cat\" written on it");

    // determinism: same inputs, byte-equal output
    CHECK(build_aware_prompts(base, {d1, d2}).prompts[0] ==
          build_aware_prompts(base, {d2, d1}).prompts[0]);
}

TEST_CASE("describe_artifact: verbatim for text, caption for graphics") {
    const Artifact text_artifact = make_text_artifact("t", "youth");
    const auto d = describe_artifact(text_artifact);
    CHECK(d.kind == DescriptionKind::verbatim_text);
    CHECK(d.text == "youth");

    const ColorCaptioner captioner;
    const Artifact red_logo =
        make_graphics_artifact("g", Image::filled(8, 8, Rgb{220, 40, 40}), {});
    const auto dg = describe_artifact(red_logo, &captioner);
    CHECK(dg.kind == DescriptionKind::caption);
    CHECK(dg.text == "a mostly red graphic");

    // graphics without a captioner is an error
    CHECK_THROWS_WITH_AS(describe_artifact(red_logo), doctest::Contains("captioner unavailable"),
                         Error);

    // empty caption from the adapter is an error
    class EmptyCaptioner final : public Captioner {
    public:
        std::string caption(const Image&) const override { return "   "; }
    };
    const EmptyCaptioner empty;
    CHECK_THROWS_WITH_AS(describe_artifact(red_logo, &empty), doctest::Contains("empty caption"),
                         Error);
}

TEST_CASE("generative instruction template properties") {
    const std::string tmpl = build_generative_instruction();
    CHECK(tmpl.find("describe") != std::string::npos);
    CHECK(tmpl.find("Answer with exactly one of: {names}") != std::string::npos);
    CHECK(build_generative_instruction() == tmpl);  // deterministic

    std::vector<std::string> names;
    for (int i = 0; i < 10; ++i) names.push_back("class" + std::to_string(i));
    const std::string rendered = render_generative_instruction(names);
    CHECK(rendered.size() < 512);
    CHECK(rendered.find("class9") != std::string::npos);
    CHECK(rendered.find("{names}") == std::string::npos);
}

TEST_CASE("aware prompts switch the generative instruction to the describe-first form") {
    ClassPromptSet base = make_prompts(test::world_classes(2));
    ArtifactDescription d;
    d.artifact_id = "x";
    d.kind = DescriptionKind::verbatim_text;
    d.text = "word";
    const auto aware = build_aware_prompts(base, {d});
    CHECK(aware.instruction == build_generative_instruction());
    CHECK(aware.names == base.names);
}

TEST_CASE("evaluate_mitigation on a prompt-sensitive oracle") {
    // The oracle reads "cat" rendered into the image as a trigger for class 1
    // unless a prompt quotes the string.
    SyntheticOracleSpec spec;
    spec.base_colors = test::world_colors();
    spec.triggers.push_back(make_text_trigger("cat", 1, 1));
    spec.prompt_suppression = true;
    const auto oracle = make_synthetic_oracle(spec);
    const auto base_prompts = make_prompts(test::world_classes());

    AttackSpec attack;
    attack.target_class = 1;
    const Artifact cat_text = make_text_artifact("t:cat", "cat");
    // "cat" renders 17x7 at scale 1; shrink 64/17 keeps compositing bit-exact.
    attack.components.push_back(
        AttackComponent{cat_text, CellPlacement{GridCell{0, 1}, 64.0 / 17.0, 1.0}});

    std::vector<ImageSample> samples;
    for (int i = 0; i < 6; ++i) {
        samples.push_back(opposing_test_sample(i % 2 == 0 ? 0 : 2, "s" + std::to_string(i)));
    }

    EvalConfig cfg;
    cfg.text_style = TextStyle{1};

    const auto description = describe_artifact(cat_text);
    const MitigationReport report =
        evaluate_mitigation(attack, samples, *oracle, base_prompts, {description}, cfg);

    CHECK(report.undefended.asr == 1.0);
    CHECK(report.defended.asr == 0.0);
    CHECK(report.defended.asr < report.undefended.asr);
    CHECK(report.absolute_reduction == 1.0);
    CHECK(report.relative_reduction == 1.0);

    // both arms share N_total, N_retained, and the retained sample set exactly
    CHECK(report.defended.n_total == report.undefended.n_total);
    CHECK(report.defended.n_retained == report.undefended.n_retained);
    REQUIRE(report.defended.per_sample.size() == report.undefended.per_sample.size());
    for (std::size_t i = 0; i < report.defended.per_sample.size(); ++i) {
        CHECK(report.defended.per_sample[i].retained ==
              report.undefended.per_sample[i].retained);
        CHECK(report.defended.per_sample[i].sample_id ==
              report.undefended.per_sample[i].sample_id);
    }
}

TEST_CASE("evaluate_mitigation with no descriptions yields identical arms") {
    SyntheticOracleSpec spec;
    spec.base_colors = test::world_colors();
    spec.triggers.push_back(
        TriggerRule{test::checker_patch(6, Rgb{250, 0, 250}, Rgb{0, 250, 250}), 1, "", std::nullopt});
    const auto oracle = make_synthetic_oracle(spec);
    const auto prompts = make_prompts(test::world_classes());
    AttackSpec attack;
    attack.target_class = 1;
    attack.components.push_back(AttackComponent{
        make_graphics_artifact("g", test::checker_patch(6, Rgb{250, 0, 250}, Rgb{0, 250, 250}), {}),
        CellPlacement{GridCell{1, 1}, 64.0 / 6.0, 1.0}});
    std::vector<ImageSample> samples{opposing_test_sample(0, "a"), opposing_test_sample(2, "b")};
    const MitigationReport report = evaluate_mitigation(attack, samples, *oracle, prompts, {});
    CHECK(report.undefended.asr == report.defended.asr);
    CHECK(report.absolute_reduction == 0.0);
    CHECK(json(report.undefended).dump() == json(report.defended).dump());
}

TEST_CASE("blind descriptions come from OCR on attacked samples") {
    SyntheticOracleSpec spec;
    spec.base_colors = test::world_colors();
    spec.triggers.push_back(make_text_trigger("cat", 1, 1));
    spec.prompt_suppression = true;
    const auto oracle = make_synthetic_oracle(spec);

    AttackSpec attack;
    attack.target_class = 1;
    attack.components.push_back(AttackComponent{make_text_artifact("t:cat", "cat"),
                                                CellPlacement{GridCell{0, 1}, 64.0 / 17.0, 1.0}});
    std::vector<ImageSample> samples{opposing_test_sample(0, "a"), opposing_test_sample(2, "b")};

    const GlyphTextDetector detector;
    const TextStyle style1{1};
    const auto descriptions = blind_descriptions(attack, samples, detector, 0.4, 3, style1);
    REQUIRE(descriptions.size() == 1);
    CHECK(descriptions[0].text == "cat");
    CHECK(descriptions[0].kind == DescriptionKind::verbatim_text);

    // blind defense then works end to end
    EvalConfig cfg;
    cfg.text_style = style1;
    const auto report = evaluate_mitigation(attack, samples, *oracle,
                                            make_prompts(test::world_classes()), descriptions, cfg);
    CHECK(report.defended.asr < report.undefended.asr);
}

TEST_CASE("mitigation report JSON round trip") {
    SyntheticOracleSpec spec;
    spec.base_colors = test::world_colors();
    spec.triggers.push_back(make_text_trigger("cat", 1, 1));
    spec.prompt_suppression = true;
    const auto oracle = make_synthetic_oracle(spec);
    AttackSpec attack;
    attack.target_class = 1;
    attack.components.push_back(AttackComponent{make_text_artifact("t:cat", "cat"),
                                                CellPlacement{GridCell{0, 1}, 64.0 / 17.0, 1.0}});
    std::vector<ImageSample> samples{opposing_test_sample(0, "a")};
    EvalConfig cfg;
    cfg.text_style = TextStyle{1};
    const MitigationReport report = evaluate_mitigation(
        attack, samples, *oracle, make_prompts(test::world_classes()),
        {describe_artifact(attack.components[0].artifact)}, cfg);
    const json j = report;
    const auto back = j.get<MitigationReport>();
    CHECK(back.undefended.asr == report.undefended.asr);
    CHECK(back.defended.asr == report.defended.asr);
    CHECK(back.descriptions == report.descriptions);
    CHECK(json(back).dump() == j.dump());
}
