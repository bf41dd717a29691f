#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "avatarkit/datamodels.hpp"
#include "avatarkit/detector.hpp"
#include "avatarkit/diffusion.hpp"
#include "avatarkit/guidance.hpp"
#include "avatarkit/io.hpp"
#include "avatarkit/kvconfig.hpp"
#include "avatarkit/landmarks.hpp"
#include "avatarkit/rng.hpp"

namespace avatarkit {

inline const std::vector<std::string>& canonical_category_names() {
    static const std::vector<std::string> names = {
        "Realistic", "Animals", "Fruits", "Plants", "OfficeAccessories", "Bags", "Clothes", "Cartoons",
    };
    return names;
}

struct CategorySpec {
    std::string name;
    double abstractness = 0.5;              // distance from the detectable face manifold
    std::vector<std::string> prompt_nouns;

    void validate() const {
        bool known = false;
        for (const auto& n : canonical_category_names()) {
            if (n == name) known = true;
        }
        if (!known) throw std::invalid_argument("CategorySpec: unknown category name '" + name + "'");
        if (!(abstractness >= 0.0 && abstractness <= 1.0)) {
            throw std::invalid_argument("CategorySpec: abstractness must lie in [0,1]");
        }
        if (prompt_nouns.empty()) throw std::invalid_argument("CategorySpec: prompt_nouns must not be empty");
    }
};

struct EvalVariant {
    std::string label;
    GuidanceConfig guidance;
};

struct EvalSuite {
    std::vector<CategorySpec> categories;
    int samples_per_category = 50;
    uint64_t base_seed = 0;
    std::vector<EvalVariant> variants;
    std::vector<std::vector<std::string>> prompts;   // per category, samples_per_category entries
    int latent_width = 32;
    int latent_height = 32;
    int num_steps = 50;

    void validate() const {
        if (categories.size() != 8) throw std::invalid_argument("EvalSuite: expected the 8 categories");
        for (const auto& c : categories) c.validate();
        if (samples_per_category < 1) {
            throw std::invalid_argument("EvalSuite: samples_per_category must be >= 1");
        }
        if (variants.empty()) throw std::invalid_argument("EvalSuite: no variants");
        for (size_t i = 0; i < variants.size(); ++i) {
            variants[i].guidance.validate();
            for (size_t j = i + 1; j < variants.size(); ++j) {
                if (variants[i].label == variants[j].label) {
                    throw std::invalid_argument("EvalSuite: duplicate variant label '" + variants[i].label + "'");
                }
            }
        }
    }
};

/// Stable per-sample seed: fnv1a over (base_seed LE bytes, category, index LE bytes).
inline uint64_t sample_seed(uint64_t base_seed, const std::string& category, int index) {
    uint64_t h = 0xCBF29CE484222325ULL;
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((base_seed >> (8 * i)) & 0xFF);
    h = fnv1a64_bytes(buf, 8, h);
    h = fnv1a64_bytes(category.data(), category.size(), h);
    unsigned char ib[4];
    for (int i = 0; i < 4; ++i) ib[i] = static_cast<unsigned char>((static_cast<uint32_t>(index) >> (8 * i)) & 0xFF);
    return fnv1a64_bytes(ib, 4, h);
}

struct SuiteParams {
    int samples_per_category = 50;
    uint64_t base_seed = 0;
    std::vector<EvalVariant> variants;               // empty: neutral + guided + injection sweep
    std::map<std::string, double> abstractness_overrides;
    std::map<std::string, std::vector<std::string>> noun_overrides;
    int latent_width = 32;
    int latent_height = 32;
    int num_steps = 50;
};

inline GuidanceConfig guidance_variant(double injection, double window, double structural) {
    GuidanceConfig cfg;
    cfg.injection_weight = injection;
    cfg.window_fraction = window;
    cfg.structural_weight = structural;
    return cfg;
}

inline std::vector<EvalVariant> default_eval_variants() {
    std::vector<EvalVariant> v;
    v.push_back({"neutral", guidance_variant(0.0, 0.0, 0.0)});
    v.push_back({"guided", guidance_variant(0.6, 0.4, 1.0)});
    for (double lam : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        v.push_back({"sweep-l" + format_double(lam * 100, "%.0f"), guidance_variant(lam, 0.4, 1.0)});
    }
    return v;
}

/// Calibrated abstractness defaults. Tuned so the neutral detection-rate
/// profile is graded across categories with Realistic on top and Cartoons at
/// the bottom; the values are suite calibration, not measurements.
inline const std::map<std::string, double>& default_abstractness() {
    static const std::map<std::string, double> d = {
        {"Realistic", 0.10}, {"Fruits", 0.235}, {"Plants", 0.39},  {"Bags", 0.38},
        {"Clothes", 0.37},   {"OfficeAccessories", 0.27}, {"Animals", 0.30}, {"Cartoons", 0.88},
    };
    return d;
}

inline const std::map<std::string, std::vector<std::string>>& default_prompt_nouns() {
    static const std::map<std::string, std::vector<std::string>> nouns = {
        {"Realistic", {"man", "woman", "teacher", "doctor", "king", "sailor"}},
        {"Animals", {"cat", "dog", "fox", "owl", "lion", "rabbit"}},
        {"Fruits", {"apple", "pear", "mango", "cherry", "lemon", "peach"}},
        {"Plants", {"cactus", "fern", "bonsai", "sunflower", "moss", "ivy"}},
        {"OfficeAccessories", {"stapler", "notebook", "lamp", "keyboard", "mug", "clock"}},
        {"Bags", {"backpack", "satchel", "tote", "suitcase", "purse", "duffel"}},
        {"Clothes", {"jacket", "scarf", "sweater", "boot", "hat", "glove"}},
        {"Cartoons", {"robot", "goblin", "wizard", "pirate", "dragon", "snowman"}},
    };
    return nouns;
}

/// Builds the 8-category evaluation suite: prompt strings of the form
/// "a portrait of a {noun}, fine face." cycling through the category nouns,
/// and stable per-sample seeds derived from (base_seed, category, index).
inline EvalSuite build_suite(const SuiteParams& params = {}) {
    EvalSuite suite;
    suite.samples_per_category = params.samples_per_category;
    suite.base_seed = params.base_seed;
    suite.variants = params.variants.empty() ? default_eval_variants() : params.variants;
    suite.latent_width = params.latent_width;
    suite.latent_height = params.latent_height;
    suite.num_steps = params.num_steps;

    for (const std::string& name : canonical_category_names()) {
        CategorySpec cat;
        cat.name = name;
        cat.abstractness = default_abstractness().at(name);
        if (auto it = params.abstractness_overrides.find(name); it != params.abstractness_overrides.end()) {
            cat.abstractness = it->second;
        }
        cat.prompt_nouns = default_prompt_nouns().at(name);
        if (auto it = params.noun_overrides.find(name); it != params.noun_overrides.end()) {
            cat.prompt_nouns = it->second;
        }
        cat.validate();
        std::vector<std::string> prompts;
        prompts.reserve(suite.samples_per_category);
        for (int i = 0; i < suite.samples_per_category; ++i) {
            const std::string& noun = cat.prompt_nouns[i % cat.prompt_nouns.size()];
            prompts.push_back("a portrait of a " + noun + ", fine face.");
        }
        suite.prompts.push_back(std::move(prompts));
        suite.categories.push_back(std::move(cat));
    }
    suite.validate();
    return suite;
}

struct EvalRow {
    std::string category;
    std::string variant;
    int n = 0;
    int detected = 0;
    double rate = 0.0;
};

struct EvalReport {
    std::vector<EvalRow> rows;                                   // variant-major, suite order
    std::vector<std::pair<std::string, double>> variant_averages;  // unweighted mean over categories

    const EvalRow& row(const std::string& category, const std::string& variant) const {
        for (const auto& r : rows) {
            if (r.category == category && r.variant == variant) return r;
        }
        throw std::out_of_range("EvalReport: no row for " + category + "/" + variant);
    }

    double average(const std::string& variant) const {
        for (const auto& [label, avg] : variant_averages) {
            if (label == variant) return avg;
        }
        throw std::out_of_range("EvalReport: no variant '" + variant + "'");
    }
};

struct EvalRunOptions {
    int jobs = 1;
    // Optional sink for generated portraits, keyed (category, variant, index).
    std::function<void(const std::string&, const std::string&, int, const Image&)> portrait_sink;
};

/// Runs the full suite: every (category, sample, variant) portrait is sampled
/// with the variant's guidance and gated by the detector. Deterministic for a
/// given suite, independent of the worker count: per-sample seeds fix all
/// randomness and aggregation order is fixed after the parallel phase.
inline EvalReport run_eval(const EvalSuite& suite, const LandmarkMemory& bank,
                           const DetectorConfig& detector_cfg = {}, const EvalRunOptions& options = {}) {
    suite.validate();
    bank.validate();
    detector_cfg.validate();

    const NoiseSchedule sched = NoiseSchedule::cosine(suite.num_steps);
    const Image& face = bank.templates.front().raster;

    std::vector<GaussianMixture> models;
    std::vector<Denoiser> denoisers;
    for (const auto& cat : suite.categories) {
        models.push_back(face_blend_model(face, cat.name, cat.abstractness));
        denoisers.push_back(make_posterior_denoiser(models.back(), sched));
    }
    std::vector<GuidanceHook> hooks;
    for (const auto& variant : suite.variants) {
        hooks.push_back(make_hook(variant.guidance, bank, sched));
    }

    struct Task {
        size_t cat;
        size_t variant;
        int index;
    };
    std::vector<Task> tasks;
    for (size_t c = 0; c < suite.categories.size(); ++c) {
        for (int i = 0; i < suite.samples_per_category; ++i) {
            for (size_t v = 0; v < suite.variants.size(); ++v) tasks.push_back({c, v, i});
        }
    }

    std::vector<uint8_t> found(tasks.size(), 0);
    const SampleOptions sample_opts{suite.latent_width, suite.latent_height, ReverseMode::deterministic};

    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const size_t idx = next.fetch_add(1);
            if (idx >= tasks.size()) break;
            const Task& task = tasks[idx];
            const uint64_t seed =
                sample_seed(suite.base_seed, suite.categories[task.cat].name, task.index);
            Image portrait = sample(denoisers[task.cat], sched, seed, sample_opts, &hooks[task.variant]);
            Detection det = detect(portrait, bank, detector_cfg);
            found[idx] = det.found ? 1 : 0;
            if (options.portrait_sink) {
                options.portrait_sink(suite.categories[task.cat].name, suite.variants[task.variant].label,
                                      task.index, portrait);
            }
        }
    };

    const int jobs = std::max(1, options.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    EvalReport report;
    for (size_t v = 0; v < suite.variants.size(); ++v) {
        double rate_sum = 0.0;
        for (size_t c = 0; c < suite.categories.size(); ++c) {
            EvalRow row;
            row.category = suite.categories[c].name;
            row.variant = suite.variants[v].label;
            row.n = suite.samples_per_category;
            for (size_t idx = 0; idx < tasks.size(); ++idx) {
                if (tasks[idx].cat == c && tasks[idx].variant == v && found[idx]) ++row.detected;
            }
            row.rate = static_cast<double>(row.detected) / row.n;
            rate_sum += row.rate;
            report.rows.push_back(std::move(row));
        }
        report.variant_averages.emplace_back(suite.variants[v].label,
                                             rate_sum / suite.categories.size());
    }
    return report;
}

// ---------------------------------------------------------------------------
// Report formats
// ---------------------------------------------------------------------------

inline std::string report_csv(const EvalReport& report) {
    std::string out = "category,variant,n,detected,rate\n";
    for (const auto& r : report.rows) {
        out += r.category + "," + r.variant + "," + std::to_string(r.n) + "," +
               std::to_string(r.detected) + "," + format_double(r.rate) + "\n";
    }
    return out;
}

inline EvalReport parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "category,variant,n,detected,rate") {
        throw IoError("parse_report_csv: missing header");
    }
    EvalReport report;
    std::map<std::string, std::pair<double, int>> sums;
    std::vector<std::string> variant_order;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        EvalRow r;
        std::string n, detected, rate;
        if (!std::getline(row, r.category, ',') || !std::getline(row, r.variant, ',') ||
            !std::getline(row, n, ',') || !std::getline(row, detected, ',') || !std::getline(row, rate)) {
            throw IoError("parse_report_csv: malformed row '" + line + "'");
        }
        r.n = std::stoi(n);
        r.detected = std::stoi(detected);
        r.rate = static_cast<double>(r.detected) / r.n;
        if (std::abs(r.rate - std::stod(rate)) > 1e-9) {
            throw IoError("parse_report_csv: rate column disagrees with detected/n in '" + line + "'");
        }
        if (!sums.count(r.variant)) variant_order.push_back(r.variant);
        auto& [sum, count] = sums[r.variant];
        sum += r.rate;
        ++count;
        report.rows.push_back(std::move(r));
    }
    for (const auto& v : variant_order) {
        report.variant_averages.emplace_back(v, sums[v].first / sums[v].second);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Suite config files: [suite] + repeated [category] / [variant] sections plus
// an optional [detector] section for the harness detector settings.
// ---------------------------------------------------------------------------

inline SuiteParams suite_params_from_kv(const KvDoc& doc) {
    SuiteParams params;
    if (const KvSection* suite = doc.find("suite")) {
        params.samples_per_category = static_cast<int>(suite->get_int_or("samples", 50));
        params.base_seed = static_cast<uint64_t>(suite->get_int_or("seed", 0));
        params.latent_width = static_cast<int>(suite->get_int_or("width", 32));
        params.latent_height = static_cast<int>(suite->get_int_or("height", 32));
        params.num_steps = static_cast<int>(suite->get_int_or("steps", 50));
    }
    for (const KvSection* cat : doc.all("category")) {
        const std::string name = cat->get("name");
        if (const std::string* d = cat->find("abstractness")) {
            params.abstractness_overrides[name] = std::stod(*d);
        }
        if (const std::string* nouns = cat->find("nouns")) {
            params.noun_overrides[name] = split_list(*nouns);
        }
    }
    for (const KvSection* var : doc.all("variant")) {
        EvalVariant v;
        v.label = var->get("label");
        v.guidance.injection_weight = var->get_double_or("lambda", 0.6);
        v.guidance.window_fraction = var->get_double_or("window", 0.4);
        v.guidance.structural_weight = var->get_double_or("structural", 1.0);
        v.guidance.blur_std = var->get_double_or("blur", 1.5);
        v.guidance.landmark_id = var->get_or("landmark", "auto");
        params.variants.push_back(std::move(v));
    }
    return params;
}

inline DetectorConfig detector_from_kv(const KvDoc& doc, DetectorConfig base = {}) {
    if (const KvSection* det = doc.find("detector")) {
        base.threshold = det->get_double_or("theta", base.threshold);
        base.search_radius = static_cast<int>(det->get_int_or("radius", base.search_radius));
        base.blur_std = det->get_double_or("blur", base.blur_std);
        if (const std::string* scales = det->find("scales")) {
            base.scales.clear();
            for (const auto& s : split_list(*scales)) base.scales.push_back(std::stod(s));
        }
    }
    base.validate();
    return base;
}

/// Harness detector defaults: same contract as the CLI detector but with a
/// lighter blur, which is what the suite calibration assumes.
inline DetectorConfig default_suite_detector() {
    DetectorConfig cfg;
    cfg.blur_std = 0.9;
    return cfg;
}

/// Markdown table shaped like the detection-rate comparison: categories as
/// columns, one row per variant, unweighted average as the final column,
/// percentages with one decimal.
inline std::string report_markdown(const EvalReport& report) {
    std::vector<std::string> categories;
    for (const auto& r : report.rows) {
        if (r.variant == report.rows.front().variant) categories.push_back(r.category);
    }
    std::string out = "| Variant |";
    for (const auto& c : categories) out += " " + c + " |";
    out += " Avg |\n|---|";
    for (size_t i = 0; i <= categories.size(); ++i) out += "---|";
    out += "\n";
    for (const auto& [variant, avg] : report.variant_averages) {
        out += "| " + variant + " |";
        for (const auto& c : categories) {
            out += " " + format_double(report.row(c, variant).rate * 100.0, "%.1f") + " |";
        }
        out += " " + format_double(avg * 100.0, "%.1f") + " |\n";
    }
    return out;
}

}  // namespace avatarkit
