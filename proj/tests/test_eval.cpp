#include <catch_amalgamated.hpp>

#include "avatarkit/eval.hpp"
#include "avatarkit/io.hpp"

using namespace avatarkit;

namespace {

EvalSuite tiny_suite(uint64_t seed) {
    SuiteParams params;
    params.samples_per_category = 3;
    params.base_seed = seed;
    params.variants = {{"neutral", guidance_variant(0.0, 0.0, 0.0)},
                       {"guided", guidance_variant(0.6, 0.4, 1.0)}};
    params.latent_width = 24;
    params.latent_height = 24;
    params.num_steps = 20;
    return build_suite(params);
}

}  // namespace

TEST_CASE("build_suite prompt strings cycle the category nouns") {
    EvalSuite suite = build_suite();
    CHECK(suite.categories.size() == 8);
    CHECK(suite.categories.front().name == "Realistic");
    CHECK(suite.prompts[0][0] == "a portrait of a man, fine face.");
    CHECK(suite.prompts[0][1] == "a portrait of a woman, fine face.");
    // six nouns cycle
    CHECK(suite.prompts[0][6] == suite.prompts[0][0]);
    CHECK(suite.prompts[2][0] == "a portrait of a apple, fine face.");
}

TEST_CASE("unknown categories and bad params are rejected") {
    EvalSuite suite = build_suite();
    suite.categories[3].name = "Vehicles";
    CHECK_THROWS_AS(suite.validate(), std::invalid_argument);

    SuiteParams params;
    params.samples_per_category = 0;
    CHECK_THROWS_AS(build_suite(params), std::invalid_argument);

    SuiteParams dup;
    dup.variants = {{"x", guidance_variant(0, 0, 0)}, {"x", guidance_variant(1, 1, 1)}};
    CHECK_THROWS_AS(build_suite(dup), std::invalid_argument);
}

TEST_CASE("zero abstractness collapses data means onto the face raster") {
    LandmarkMemory memory = LandmarkMemory::builtin();
    const Image& face = memory.templates.front().raster;
    GaussianMixture gm = face_blend_model(face, "Realistic", 0.0);
    for (const auto& comp : gm.components) {
        CHECK(max_abs_difference(comp.mean, face) == 0.0);
    }
}

TEST_CASE("per-sample seeds are stable across builds and distinct across inputs") {
    const uint64_t pinned = sample_seed(7, "Realistic", 0);
    CHECK(sample_seed(7, "Realistic", 0) == pinned);
    CHECK(sample_seed(7, "Realistic", 1) != pinned);
    CHECK(sample_seed(7, "Animals", 0) != pinned);
    CHECK(sample_seed(8, "Realistic", 0) != pinned);

    EvalSuite a = build_suite();
    EvalSuite b = build_suite();
    for (const auto& cat : a.categories) {
        for (int i = 0; i < 3; ++i) {
            CHECK(sample_seed(a.base_seed, cat.name, i) == sample_seed(b.base_seed, cat.name, i));
        }
    }
}

TEST_CASE("run_eval is deterministic and worker-count independent") {
    EvalSuite suite = tiny_suite(11);
    LandmarkMemory memory = LandmarkMemory::builtin(24, 24);
    DetectorConfig det = default_suite_detector();

    EvalRunOptions serial;
    serial.jobs = 1;
    EvalRunOptions parallel;
    parallel.jobs = 4;

    EvalReport r1 = run_eval(suite, memory, det, serial);
    EvalReport r2 = run_eval(suite, memory, det, serial);
    EvalReport r3 = run_eval(suite, memory, det, parallel);

    CHECK(report_csv(r1) == report_csv(r2));
    CHECK(report_csv(r1) == report_csv(r3));

    // row invariants
    for (const auto& row : r1.rows) {
        CHECK(row.detected <= row.n);
        CHECK(row.rate == Catch::Approx(static_cast<double>(row.detected) / row.n).margin(1e-12));
    }
    // unweighted 8-category average
    for (const auto& [variant, avg] : r1.variant_averages) {
        double sum = 0.0;
        for (const auto& row : r1.rows) {
            if (row.variant == variant) sum += row.rate;
        }
        CHECK(avg == Catch::Approx(sum / 8.0).margin(1e-12));
    }
}

TEST_CASE("report csv round trips") {
    EvalSuite suite = tiny_suite(3);
    LandmarkMemory memory = LandmarkMemory::builtin(24, 24);
    EvalReport report = run_eval(suite, memory, default_suite_detector(), {});

    EvalReport back = parse_report_csv(report_csv(report));
    REQUIRE(back.rows.size() == report.rows.size());
    for (size_t i = 0; i < report.rows.size(); ++i) {
        CHECK(back.rows[i].category == report.rows[i].category);
        CHECK(back.rows[i].variant == report.rows[i].variant);
        CHECK(back.rows[i].n == report.rows[i].n);
        CHECK(back.rows[i].detected == report.rows[i].detected);
        CHECK(back.rows[i].rate == report.rows[i].rate);
    }
    REQUIRE(back.variant_averages.size() == report.variant_averages.size());
    for (size_t i = 0; i < report.variant_averages.size(); ++i) {
        CHECK(back.variant_averages[i].first == report.variant_averages[i].first);
        CHECK(back.variant_averages[i].second ==
              Catch::Approx(report.variant_averages[i].second).margin(1e-12));
    }

    CHECK_THROWS_AS(parse_report_csv("nope\n"), IoError);
}

TEST_CASE("markdown layout: categories as columns, variants as rows, Avg last") {
    EvalReport report;
    for (const std::string& variant : {"neutral", "guided"}) {
        double sum = 0.0;
        for (const auto& name : canonical_category_names()) {
            EvalRow row{name, variant, 50, variant == "guided" ? 50 : 25, 0.0};
            row.rate = row.detected / 50.0;
            sum += row.rate;
            report.rows.push_back(row);
        }
        report.variant_averages.emplace_back(variant, sum / 8.0);
    }
    std::string md = report_markdown(report);
    CHECK(md.find("| Variant | Realistic | Animals | Fruits | Plants | OfficeAccessories | Bags | "
                  "Clothes | Cartoons | Avg |") == 0);
    CHECK(md.find("| guided | 100.0 | 100.0 | 100.0 | 100.0 | 100.0 | 100.0 | 100.0 | 100.0 | 100.0 |") !=
          std::string::npos);
    CHECK(md.find("| neutral | 50.0 |") != std::string::npos);

    std::string golden = read_file(std::string(AVATARKIT_SOURCE_DIR) + "/tests/data/golden_report.md");
    CHECK(md == golden);
}

TEST_CASE("suite config files parse into params") {
    const std::string cfg =
        "[suite]\n"
        "samples = 5\n"
        "steps = 20\n"
        "width = 24\n"
        "height = 24\n"
        "[category]\n"
        "name = Cartoons\n"
        "abstractness = 0.95\n"
        "nouns = blob, sprite\n"
        "[variant]\n"
        "label = neutral\n"
        "lambda = 0\n"
        "window = 0\n"
        "structural = 0\n"
        "[variant]\n"
        "label = strong\n"
        "lambda = 1\n"
        "window = 1\n"
        "structural = 2\n"
        "[detector]\n"
        "theta = 0.55\n"
        "blur = 1.1\n";
    KvDoc doc = KvDoc::parse(cfg);
    SuiteParams params = suite_params_from_kv(doc);
    CHECK(params.samples_per_category == 5);
    CHECK(params.num_steps == 20);
    CHECK(params.variants.size() == 2);
    CHECK(params.variants[1].guidance.injection_weight == 1.0);
    CHECK(params.abstractness_overrides.at("Cartoons") == 0.95);
    CHECK(params.noun_overrides.at("Cartoons") == std::vector<std::string>{"blob", "sprite"});

    EvalSuite suite = build_suite(params);
    CHECK(suite.categories[7].abstractness == 0.95);
    CHECK(suite.prompts[7][0] == "a portrait of a blob, fine face.");

    DetectorConfig det = detector_from_kv(doc);
    CHECK(det.threshold == 0.55);
    CHECK(det.blur_std == 1.1);

    // shipped default suite config loads cleanly
    KvDoc shipped = KvDoc::parse(read_file(std::string(AVATARKIT_SOURCE_DIR) + "/data/suite/default_suite.cfg"));
    SuiteParams shipped_params = suite_params_from_kv(shipped);
    CHECK_NOTHROW(build_suite(shipped_params));
    CHECK(detector_from_kv(shipped, default_suite_detector()).blur_std ==
          default_suite_detector().blur_std);
}
