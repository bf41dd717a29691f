// avatarkit: landmark-guided portrait generation, detection, routing,
// persona initialization and the detection-rate evaluation harness.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "avatarkit/datamodels.hpp"
#include "avatarkit/detector.hpp"
#include "avatarkit/diffusion.hpp"
#include "avatarkit/eval.hpp"
#include "avatarkit/guidance.hpp"
#include "avatarkit/http_llm.hpp"
#include "avatarkit/io.hpp"
#include "avatarkit/landmarks.hpp"
#include "avatarkit/persona.hpp"
#include "avatarkit/router.hpp"

namespace fs = std::filesystem;
using namespace avatarkit;

namespace {

std::string detection_csv_row(const Detection& det) {
    std::string out = std::string(det.found ? "1" : "0") + "," + format_double(det.confidence);
    if (det.found) {
        for (const Point& p : det.landmarks.points()) {
            out += "," + format_double(p.x) + "," + format_double(p.y);
        }
    }
    return out + "\n";
}

std::unique_ptr<LlmClient> llm_client_from_env() {
    const char* endpoint = std::getenv("AVATARKIT_LLM_ENDPOINT");
    if (endpoint == nullptr || *endpoint == '\0') return nullptr;
    const char* key = std::getenv("AVATARKIT_LLM_API_KEY");
    return std::make_unique<HttpLlmClient>(endpoint, key ? key : "");
}

LandmarkMemory memory_from_flag(const std::string& dir, int width, int height) {
    if (dir.empty()) return LandmarkMemory::builtin(width, height);
    return LandmarkMemory::load_dir(dir, width, height);
}

struct GenFlags {
    std::string out = "out";
    std::string memory_dir;
    std::string registry;
    std::string desc;
    std::string data_model = "photoreal";
    std::string landmark = "auto";
    uint64_t seed = 0;
    int steps = 50;
    int width = 32;
    int height = 32;
    double injection = 0.6;
    double window = 0.4;
    double structural = 1.0;
    double guidance_blur = 1.5;
    double theta = 0.6;
    int radius = 4;
    double det_blur = 1.5;
};

int run_gen(const GenFlags& f, LlmClient* client, const std::string& selector) {
    LandmarkMemory memory = memory_from_flag(f.memory_dir, f.width, f.height);
    NoiseSchedule sched = NoiseSchedule::cosine(f.steps);

    std::string model_id = f.data_model;
    GuidanceConfig cfg;
    cfg.injection_weight = f.injection;
    cfg.window_fraction = f.window;
    cfg.structural_weight = f.structural;
    cfg.blur_std = f.guidance_blur;
    cfg.landmark_id = f.landmark;

    if (!f.desc.empty()) {
        Registry reg = f.registry.empty() ? builtin_diffuser_registry() : load_registry(f.registry);
        SelectionResult sel = select(reg, f.desc, selector == "llm" ? SelectorKind::llm : SelectorKind::lexical,
                                     client);
        auto [payload_model, payload_cfg] = parse_diffuser_payload(reg.find(sel.expert_id)->payload);
        model_id = payload_model;
        payload_cfg.injection_weight = f.injection;
        payload_cfg.window_fraction = f.window;
        payload_cfg.structural_weight = f.structural;
        payload_cfg.landmark_id = f.landmark;
        cfg = payload_cfg;
        std::cout << "routed to " << sel.expert_id << (sel.fallback ? " (fallback)" : "") << "\n";
    }

    const LandmarkTemplate& tpl = memory.by_id(cfg.landmark_id);
    GaussianMixture gm = named_data_model(model_id, tpl.raster);
    Denoiser denoiser = make_posterior_denoiser(gm, sched);
    GuidanceHook hook = make_hook(cfg, memory, sched);
    Image portrait = sample(denoiser, sched, f.seed, {f.width, f.height, ReverseMode::deterministic}, &hook);

    DetectorConfig det_cfg;
    det_cfg.threshold = f.theta;
    det_cfg.search_radius = f.radius;
    det_cfg.blur_std = f.det_blur;
    Detection det = detect(portrait, memory, det_cfg);

    write_file(fs::path(f.out) / "portrait.pgm", pgm_encode(portrait));
    write_file(fs::path(f.out) / "portrait.csv", image_csv_encode(portrait));
    write_file(fs::path(f.out) / "detection.csv", detection_csv_row(det));
    std::cout << "portrait " << (det.found ? "detected" : "NOT detected") << " (confidence "
              << format_double(det.confidence) << ") -> " << (fs::path(f.out) / "portrait.pgm").string()
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"landmark-guided portrait toolkit"};
    app.require_subcommand(1);

    std::unique_ptr<LlmClient> client = llm_client_from_env();

    // ---- gen ----
    GenFlags gen;
    std::string gen_selector = "lexical";
    CLI::App* cmd_gen = app.add_subcommand("gen", "generate a guided portrait (PGM + detection CSV)");
    cmd_gen->add_option("--out", gen.out, "output directory")->capture_default_str();
    cmd_gen->add_option("--seed", gen.seed, "random seed")->capture_default_str();
    cmd_gen->add_option("--memory", gen.memory_dir, "landmark template directory (default: built-in pool)");
    cmd_gen->add_option("--registry", gen.registry, "diffuser registry file (default: built-in pool)");
    cmd_gen->add_option("--desc", gen.desc, "description; routes the data model through the registry");
    cmd_gen->add_option("--selector", gen_selector, "expert selector: lexical|llm")->capture_default_str();
    cmd_gen->add_option("--data-model", gen.data_model, "named data model when --desc is absent")
        ->capture_default_str();
    cmd_gen->add_option("--landmark", gen.landmark, "landmark template id")->capture_default_str();
    cmd_gen->add_option("--steps", gen.steps, "reverse steps")->capture_default_str();
    cmd_gen->add_option("--width", gen.width, "latent width")->capture_default_str();
    cmd_gen->add_option("--height", gen.height, "latent height")->capture_default_str();
    cmd_gen->add_option("--lambda", gen.injection, "hard injection weight")->capture_default_str();
    cmd_gen->add_option("--window", gen.window, "conditioned fraction of early steps")->capture_default_str();
    cmd_gen->add_option("--structural", gen.structural, "structural pull weight")->capture_default_str();
    cmd_gen->add_option("--guidance-blur", gen.guidance_blur, "structural blur std")->capture_default_str();
    cmd_gen->add_option("--theta", gen.theta, "detector threshold")->capture_default_str();
    cmd_gen->add_option("--radius", gen.radius, "detector search radius")->capture_default_str();
    cmd_gen->add_option("--det-blur", gen.det_blur, "detector blur std")->capture_default_str();

    // ---- detect ----
    std::string det_image, det_memory, det_out;
    double det_theta = 0.6, det_blur = 1.5;
    int det_radius = 4;
    CLI::App* cmd_detect = app.add_subcommand("detect", "detect landmarks in a PGM/CSV image");
    cmd_detect->add_option("--image", det_image, "input image (.pgm or .csv)")->required();
    cmd_detect->add_option("--memory", det_memory, "landmark template directory (default: built-in pool)");
    cmd_detect->add_option("--out", det_out, "optional output directory for detection.csv");
    cmd_detect->add_option("--theta", det_theta, "detector threshold")->capture_default_str();
    cmd_detect->add_option("--radius", det_radius, "detector search radius")->capture_default_str();
    cmd_detect->add_option("--det-blur", det_blur, "detector blur std")->capture_default_str();

    // ---- route ----
    std::string route_desc, route_registry, route_selector = "lexical";
    CLI::App* cmd_route = app.add_subcommand("route", "select an expert for a description");
    cmd_route->add_option("--desc", route_desc, "user description")->required();
    cmd_route->add_option("--registry", route_registry, "registry file (default: built-in diffusers)");
    cmd_route->add_option("--selector", route_selector, "lexical|llm")->capture_default_str();

    // ---- persona ----
    std::string persona_object, persona_out = "out", persona_memory, persona_diffusers, persona_voices;
    std::string persona_selector = "lexical", persona_say;
    uint64_t persona_seed = 0;
    bool prompt_only = false;
    CLI::App* cmd_persona = app.add_subcommand("persona", "initialize a persona from an object description");
    cmd_persona->add_option("--object", persona_object, "object description")->required();
    cmd_persona->add_flag("--prompt-only", prompt_only, "print the rendered personality prompt and exit");
    cmd_persona->add_option("--out", persona_out, "output directory")->capture_default_str();
    cmd_persona->add_option("--seed", persona_seed, "portrait seed")->capture_default_str();
    cmd_persona->add_option("--memory", persona_memory, "landmark template directory");
    cmd_persona->add_option("--diffusers", persona_diffusers, "diffuser registry file");
    cmd_persona->add_option("--voices", persona_voices, "voice registry file");
    cmd_persona->add_option("--selector", persona_selector, "lexical|llm")->capture_default_str();
    cmd_persona->add_option("--say", persona_say, "also synthesize this text to <out>/voice.wav");

    // ---- eval ----
    std::string eval_config, eval_out = "out", eval_portraits;
    uint64_t eval_seed = 0;
    int eval_samples = 50;
    int eval_jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    CLI::App* cmd_eval = app.add_subcommand("eval", "run the 8-category detection-rate suite");
    cmd_eval->add_option("--config", eval_config, "suite config file (default: built-in calibrated suite)");
    cmd_eval->add_option("--out", eval_out, "output directory")->capture_default_str();
    cmd_eval->add_option("--seed", eval_seed, "suite base seed")->capture_default_str();
    cmd_eval->add_option("--samples", eval_samples, "samples per category")->capture_default_str();
    cmd_eval->add_option("--jobs", eval_jobs, "worker threads")->capture_default_str();
    cmd_eval->add_option("--save-portraits", eval_portraits, "subdirectory of --out for per-sample PGMs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // prints usage/help; fold CLI11's error codes into the 0/1 contract
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (cmd_gen->parsed()) {
            return run_gen(gen, client.get(), gen_selector);
        }

        if (cmd_detect->parsed()) {
            Image img = load_image(det_image);
            LandmarkMemory memory = memory_from_flag(det_memory, 32, 32);
            DetectorConfig cfg;
            cfg.threshold = det_theta;
            cfg.search_radius = det_radius;
            cfg.blur_std = det_blur;
            Detection det = detect(img, memory, cfg);
            std::string row = detection_csv_row(det);
            std::cout << row;
            if (!det_out.empty()) write_file(fs::path(det_out) / "detection.csv", row);
            return 0;
        }

        if (cmd_route->parsed()) {
            Registry reg = route_registry.empty() ? builtin_diffuser_registry() : load_registry(route_registry);
            SelectionResult sel = select(reg, route_desc,
                                         route_selector == "llm" ? SelectorKind::llm : SelectorKind::lexical,
                                         client.get());
            std::cout << sel.expert_id << "\n";
            if (sel.fallback) std::cerr << "note: fell back to lexical selection (" << sel.note << ")\n";
            return 0;
        }

        if (cmd_persona->parsed()) {
            if (prompt_only) {
                std::cout << render_personality_prompt(persona_object);
                return 0;
            }
            Registry diffusers =
                persona_diffusers.empty() ? builtin_diffuser_registry() : load_registry(persona_diffusers);
            Registry voices =
                persona_voices.empty() ? builtin_voice_registry() : load_registry(persona_voices);
            LandmarkMemory memory = memory_from_flag(persona_memory, 32, 32);
            PersonaInitOptions options;
            options.out_dir = persona_out;
            options.selector = persona_selector == "llm" ? SelectorKind::llm : SelectorKind::lexical;
            PersonaSpec spec =
                init_persona(persona_object, diffusers, voices, memory, client.get(), persona_seed, options);
            if (!persona_say.empty()) {
                Waveform wav = synthesize_voice_stub(persona_say, voice_profile_by_id(spec.voice_id));
                write_file(fs::path(persona_out) / "voice.wav",
                           wav_encode_16bit_mono(wav.samples, wav.sample_rate));
            }
            std::cout << "persona ready: diffuser=" << spec.diffuser_id << " voice=" << spec.voice_id
                      << " confidence=" << format_double(spec.detection_confidence) << " -> "
                      << (fs::path(persona_out) / "persona.cfg").string() << "\n";
            return 0;
        }

        if (cmd_eval->parsed()) {
            SuiteParams params;
            DetectorConfig det_cfg = default_suite_detector();
            if (!eval_config.empty()) {
                KvDoc doc = KvDoc::parse(read_file(eval_config));
                params = suite_params_from_kv(doc);
                det_cfg = detector_from_kv(doc, det_cfg);
            }
            if (cmd_eval->count("--samples") || eval_config.empty()) {
                params.samples_per_category = eval_samples;
            }
            params.base_seed = eval_seed;
            EvalSuite suite = build_suite(params);

            EvalRunOptions run_opts;
            run_opts.jobs = eval_jobs;
            if (!eval_portraits.empty()) {
                fs::path dir = fs::path(eval_out) / eval_portraits;
                fs::create_directories(dir);
                run_opts.portrait_sink = [dir](const std::string& category, const std::string& variant,
                                               int index, const Image& img) {
                    write_file(dir / (category + "-" + variant + "-" + std::to_string(index) + ".pgm"),
                               pgm_encode(img));
                };
            }

            LandmarkMemory memory = LandmarkMemory::builtin(suite.latent_width, suite.latent_height);
            EvalReport report = run_eval(suite, memory, det_cfg, run_opts);
            write_file(fs::path(eval_out) / "report.csv", report_csv(report));
            write_file(fs::path(eval_out) / "report.md", report_markdown(report));
            std::cout << report_markdown(report);
            return 0;
        }
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
