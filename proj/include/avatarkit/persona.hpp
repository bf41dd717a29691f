#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "avatarkit/datamodels.hpp"
#include "avatarkit/detector.hpp"
#include "avatarkit/diffusion.hpp"
#include "avatarkit/guidance.hpp"
#include "avatarkit/io.hpp"
#include "avatarkit/kvconfig.hpp"
#include "avatarkit/landmarks.hpp"
#include "avatarkit/llm.hpp"
#include "avatarkit/rng.hpp"
#include "avatarkit/router.hpp"

namespace avatarkit {

// Canonical personality-generation prompt. Must stay byte-identical to
// data/personality_prompt.txt; the test suite pins the hash of both.
inline constexpr const char* kPersonalityPromptTemplate =
    R"TPL(You are an excellent scriptwriter. Now you need to provide the characteristics of an {object} and transforms them into personality traits.
Describe these personalities using the second person, giving names and specific personality descriptions related to the {object}.
The language of the Personality must be same as {object}!

You should do the following steps:
1. Based on the object's nature, imagine what kind of personality it could have if it were to come to life. Does it possess a strong sense of responsibility, like a caring caregiver? Is it playful and mischievous, like a curious child? Is it wise and patient, like an ancient sage? Be creative and invent traits that align with the object's essence.
2. Remember to infuse emotions and vivid imagery to bring your object's personality to life. 
3. translate the personality into a second-person prompt. 

Now give the personality of {object}:

Personality:
)TPL";

/// Substitutes every `{object}` placeholder with the object text, one pass,
/// touching no other byte. The substituted text itself is never re-scanned.
inline std::string render_personality_prompt(const std::string& object_text) {
    if (trim(object_text).empty()) {
        throw std::invalid_argument("render_personality_prompt: object text must be non-empty");
    }
    const std::string tpl = kPersonalityPromptTemplate;
    const std::string placeholder = "{object}";
    std::string out;
    out.reserve(tpl.size() + 4 * object_text.size());
    size_t pos = 0;
    while (true) {
        size_t hit = tpl.find(placeholder, pos);
        if (hit == std::string::npos) {
            out.append(tpl, pos, std::string::npos);
            break;
        }
        out.append(tpl, pos, hit - pos);
        out += object_text;
        pos = hit + placeholder.size();
    }
    return out;
}

struct PersonalityResult {
    std::string text;
    bool fallback = false;
};

/// Deterministic stand-in used whenever the language-model path is absent or
/// fails: a second-person prompt built around the object name.
inline std::string fallback_personality(const std::string& object_text) {
    return "You are " + object_text + " come to life. You speak as " + object_text +
           " in the second person: curious about your own nature, warm toward the people you talk to, "
           "and quick to describe the world the way " + object_text + " would experience it. "
           "You stay in character at all times.";
}

inline PersonalityResult generate_personality(const std::string& object_text, LlmClient* client) {
    const std::string prompt = render_personality_prompt(object_text);
    if (client != nullptr) {
        std::optional<std::string> reply = client->complete(prompt, object_text);
        if (reply.has_value() && !trim(*reply).empty()) {
            return {*reply, false};
        }
    }
    return {fallback_personality(object_text), true};
}

// ---------------------------------------------------------------------------
// Voice stubs
// ---------------------------------------------------------------------------

struct VoiceProfile {
    std::string id;
    std::string tone_description;
    double base_frequency_hz = 170.0;
    double syllables_per_sec = 3.5;

    void validate() const {
        if (!(base_frequency_hz > 0.0) || !(syllables_per_sec > 0.0)) {
            throw std::invalid_argument("VoiceProfile: physical parameters must be positive");
        }
    }
};

inline const std::vector<VoiceProfile>& builtin_voice_profiles() {
    static const std::vector<VoiceProfile> profiles = {
        {"warm-low", "warm deep reassuring tone, slow pace", 110.0, 3.0},
        {"bright-high", "bright cheerful high tone, quick pace", 260.0, 4.2},
        {"calm-mid", "even mid-range tone, neutral and composed", 170.0, 3.4},
        {"gravel-low", "rough gravelly low voice, slow growl", 95.0, 2.8},
        {"airy-high", "airy light high voice, whispery", 300.0, 4.8},
    };
    return profiles;
}

inline VoiceProfile voice_profile_by_id(const std::string& id) {
    for (const auto& p : builtin_voice_profiles()) {
        if (p.id == id) return p;
    }
    std::string available;
    for (const auto& p : builtin_voice_profiles()) {
        if (!available.empty()) available += ", ";
        available += p.id;
    }
    throw std::out_of_range("unknown voice profile '" + id + "' (available: " + available + ")");
}

struct Waveform {
    int sample_rate = 16000;
    std::vector<double> samples;
};

/// Deterministic speech stand-in: one sine burst per whitespace token at the
/// profile frequency, detuned up to +-10% by the token hash. Duration is
/// tokens / rate seconds; the peak is normalized to 0.9.
inline Waveform synthesize_voice_stub(const std::string& text, const VoiceProfile& profile,
                                      int sample_rate = 16000) {
    profile.validate();
    if (sample_rate < 8000) {
        throw std::invalid_argument("synthesize_voice_stub: sample_rate must be >= 8000");
    }
    std::vector<std::string> tokens;
    {
        std::string cur;
        for (char c : text) {
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
                if (!cur.empty()) tokens.push_back(std::exchange(cur, ""));
            } else {
                cur += c;
            }
        }
        if (!cur.empty()) tokens.push_back(cur);
    }

    Waveform wav;
    wav.sample_rate = sample_rate;
    if (tokens.empty()) return wav;

    const double rate = profile.syllables_per_sec;
    std::vector<int64_t> bounds(tokens.size() + 1);
    for (size_t i = 0; i <= tokens.size(); ++i) {
        bounds[i] = std::llround(static_cast<double>(sample_rate) * i / rate);
    }
    wav.samples.assign(static_cast<size_t>(bounds.back()), 0.0);

    const double two_pi = 6.283185307179586476925286766559;
    for (size_t i = 0; i < tokens.size(); ++i) {
        const double detune = ((fnv1a64(tokens[i]) % 2001) / 1000.0 - 1.0) * 0.1;
        const double freq = profile.base_frequency_hz * (1.0 + detune);
        const int64_t begin = bounds[i];
        const int64_t len = bounds[i + 1] - begin;
        const int64_t fade = std::min<int64_t>(128, len / 4);
        for (int64_t s = 0; s < len; ++s) {
            double env = 1.0;
            if (fade > 0) {
                if (s < fade) env = static_cast<double>(s) / fade;
                if (len - 1 - s < fade) env = std::min(env, static_cast<double>(len - 1 - s) / fade);
            }
            wav.samples[static_cast<size_t>(begin + s)] =
                env * std::sin(two_pi * freq * static_cast<double>(s) / sample_rate);
        }
    }

    double peak = 0.0;
    for (double v : wav.samples) peak = std::max(peak, std::abs(v));
    if (peak > 0.0) {
        for (double& v : wav.samples) v *= 0.9 / peak;
    }
    return wav;
}

// ---------------------------------------------------------------------------
// Persona initialization
// ---------------------------------------------------------------------------

struct PersonaSpec {
    std::string object_text;
    std::string personality;
    bool personality_fallback = false;
    std::string diffuser_id;
    std::string voice_id;
    uint64_t portrait_seed = 0;
    GuidanceConfig guidance;                         // settings that produced the portrait
    std::string landmark_id;
    std::string portrait_path;
    double detection_confidence = -1.0;
    std::vector<std::pair<double, double>> attempts;  // (injection, structural) per attempt
};

struct PersonaInitError : std::runtime_error {
    double best_confidence;
    explicit PersonaInitError(const std::string& msg, double confidence)
        : std::runtime_error(msg), best_confidence(confidence) {}
};

struct PersonaInitOptions {
    std::filesystem::path out_dir;     // empty: nothing is written
    SelectorKind selector = SelectorKind::lexical;
    int latent_width = 32;
    int latent_height = 32;
    int num_steps = 50;
    int max_retries = 3;
    DetectorConfig detector;
};

/// Parses a diffuser payload like "model=anime; lambda=0.6; window=0.4; structural=1.0".
inline std::pair<std::string, GuidanceConfig> parse_diffuser_payload(const std::string& payload) {
    std::string model = "photoreal";
    GuidanceConfig cfg;
    for (const std::string& item : split_list(payload, ';')) {
        size_t eq = item.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("diffuser payload entry '" + item + "' is not key=value");
        }
        std::string key = trim(item.substr(0, eq));
        std::string value = trim(item.substr(eq + 1));
        if (key == "model") model = value;
        else if (key == "lambda") cfg.injection_weight = std::stod(value);
        else if (key == "window") cfg.window_fraction = std::stod(value);
        else if (key == "structural") cfg.structural_weight = std::stod(value);
        else if (key == "blur") cfg.blur_std = std::stod(value);
        else if (key == "landmark") cfg.landmark_id = value;
        else throw std::invalid_argument("unknown diffuser payload key '" + key + "'");
    }
    cfg.validate();
    return {model, cfg};
}

inline std::string voice_id_from_payload(const std::string& payload) {
    for (const std::string& item : split_list(payload, ';')) {
        size_t eq = item.find('=');
        if (eq != std::string::npos && trim(item.substr(0, eq)) == "voice") {
            return trim(item.substr(eq + 1));
        }
    }
    throw std::invalid_argument("voice payload '" + payload + "' carries no voice=<id> entry");
}

namespace detail {

inline std::string escape_newlines(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '\n') out += "\\n";
        else if (c == '\\') out += "\\\\";
        else out += c;
    }
    return out;
}

inline std::string unescape_newlines(const std::string& s) {
    std::string out;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            ++i;
            out += (s[i] == 'n') ? '\n' : s[i];
        } else {
            out += s[i];
        }
    }
    return out;
}

}  // namespace detail

inline KvDoc persona_to_kv(const PersonaSpec& spec) {
    KvDoc doc;
    KvSection main{"persona", {}};
    main.entries.emplace_back("object", spec.object_text);
    main.entries.emplace_back("diffuser", spec.diffuser_id);
    main.entries.emplace_back("voice", spec.voice_id);
    main.entries.emplace_back("landmark", spec.landmark_id);
    main.entries.emplace_back("seed", std::to_string(spec.portrait_seed));
    main.entries.emplace_back("portrait", spec.portrait_path);
    main.entries.emplace_back("confidence", format_double(spec.detection_confidence));
    main.entries.emplace_back("personality_fallback", spec.personality_fallback ? "true" : "false");
    main.entries.emplace_back("personality", detail::escape_newlines(spec.personality));
    doc.sections.push_back(std::move(main));

    KvSection guid{"guidance", {}};
    guid.entries.emplace_back("lambda", format_double(spec.guidance.injection_weight));
    guid.entries.emplace_back("window", format_double(spec.guidance.window_fraction));
    guid.entries.emplace_back("structural", format_double(spec.guidance.structural_weight));
    guid.entries.emplace_back("blur", format_double(spec.guidance.blur_std));
    doc.sections.push_back(std::move(guid));

    KvSection att{"attempts", {}};
    for (size_t i = 0; i < spec.attempts.size(); ++i) {
        att.entries.emplace_back("attempt" + std::to_string(i),
                                 "lambda=" + format_double(spec.attempts[i].first) +
                                     " structural=" + format_double(spec.attempts[i].second));
    }
    doc.sections.push_back(std::move(att));
    return doc;
}

inline PersonaSpec persona_from_kv(const KvDoc& doc) {
    const KvSection* main = doc.find("persona");
    if (!main) throw std::invalid_argument("persona file: missing [persona] section");
    PersonaSpec spec;
    spec.object_text = main->get("object");
    spec.diffuser_id = main->get("diffuser");
    spec.voice_id = main->get("voice");
    spec.landmark_id = main->get("landmark");
    spec.portrait_seed = std::stoull(main->get("seed"));
    spec.portrait_path = main->get_or("portrait", "");
    spec.detection_confidence = main->get_double_or("confidence", -1.0);
    spec.personality_fallback = main->get_or("personality_fallback", "false") == "true";
    spec.personality = detail::unescape_newlines(main->get("personality"));
    if (const KvSection* guid = doc.find("guidance")) {
        spec.guidance.injection_weight = guid->get_double_or("lambda", spec.guidance.injection_weight);
        spec.guidance.window_fraction = guid->get_double_or("window", spec.guidance.window_fraction);
        spec.guidance.structural_weight = guid->get_double_or("structural", spec.guidance.structural_weight);
        spec.guidance.blur_std = guid->get_double_or("blur", spec.guidance.blur_std);
    }
    if (const KvSection* att = doc.find("attempts")) {
        for (const auto& [key, value] : att->entries) {
            double lam = 0.0, st = 0.0;
            if (std::sscanf(value.c_str(), "lambda=%lf structural=%lf", &lam, &st) == 2) {
                spec.attempts.emplace_back(lam, st);
            }
        }
    }
    return spec;
}

/// Initializes a persona end to end: routes the diffuser and voice from the
/// object description, generates the personality, samples the portrait under
/// guidance and gates it on the landmark detector. Undetected portraits retry
/// with the guidance escalated by +0.2 injection / +0.5 structural per
/// attempt (capped at 1.0 / 3.0); running out of retries raises
/// PersonaInitError carrying the best confidence seen.
inline PersonaSpec init_persona(const std::string& object_text, const Registry& diffusers,
                                const Registry& voices, const LandmarkMemory& memory,
                                LlmClient* client, uint64_t seed,
                                const PersonaInitOptions& options = {}) {
    if (trim(object_text).empty()) {
        throw std::invalid_argument("init_persona: object text must be non-empty");
    }
    diffusers.validate();
    voices.validate();
    memory.validate();

    const SelectionResult diffuser_sel = select(diffusers, object_text, options.selector, client);
    const SelectionResult voice_sel = select(voices, object_text, options.selector, client);
    const Expert& diffuser = *diffusers.find(diffuser_sel.expert_id);
    const Expert& voice = *voices.find(voice_sel.expert_id);

    const PersonalityResult personality = generate_personality(object_text, client);

    auto [model_id, cfg] = parse_diffuser_payload(diffuser.payload);
    const LandmarkTemplate& tpl = memory.by_id(cfg.landmark_id);
    const NoiseSchedule sched = NoiseSchedule::cosine(options.num_steps);
    const GaussianMixture gm = named_data_model(model_id, tpl.raster);
    const Denoiser denoiser = make_posterior_denoiser(gm, sched);
    const SampleOptions sample_opts{options.latent_width, options.latent_height,
                                    ReverseMode::deterministic};

    PersonaSpec spec;
    spec.object_text = object_text;
    spec.personality = personality.text;
    spec.personality_fallback = personality.fallback;
    spec.diffuser_id = diffuser.id;
    spec.voice_id = voice_id_from_payload(voice.payload);
    spec.portrait_seed = seed;
    spec.landmark_id = tpl.id;

    Image portrait;
    Detection det;
    double best_confidence = -1.0;
    bool found = false;
    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
        spec.attempts.emplace_back(cfg.injection_weight, cfg.structural_weight);
        GuidanceHook hook = make_hook(cfg, memory, sched);
        portrait = sample(denoiser, sched, seed, sample_opts, &hook);
        det = detect(portrait, memory, options.detector);
        best_confidence = std::max(best_confidence, det.confidence);
        if (det.found) {
            found = true;
            break;
        }
        cfg.injection_weight = std::min(1.0, cfg.injection_weight + 0.2);
        cfg.structural_weight = std::min(3.0, cfg.structural_weight + 0.5);
    }
    if (!found) {
        throw PersonaInitError("init_persona: portrait stayed undetected after " +
                                   std::to_string(spec.attempts.size()) +
                                   " attempts (best confidence " + format_double(best_confidence) + ")",
                               best_confidence);
    }

    spec.guidance = cfg;
    spec.detection_confidence = det.confidence;

    if (!options.out_dir.empty()) {
        std::filesystem::create_directories(options.out_dir);
        spec.portrait_path = "portrait.pgm";
        write_file(options.out_dir / spec.portrait_path, pgm_encode(portrait));
        write_file(options.out_dir / "persona.cfg", persona_to_kv(spec).to_string());
    }
    return spec;
}

}  // namespace avatarkit
