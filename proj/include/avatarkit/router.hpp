#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "avatarkit/io.hpp"
#include "avatarkit/kvconfig.hpp"
#include "avatarkit/llm.hpp"

namespace avatarkit {

enum class ExpertKind { diffuser, voice };

inline const char* to_string(ExpertKind k) { return k == ExpertKind::diffuser ? "diffuser" : "voice"; }

inline ExpertKind expert_kind_from_string(const std::string& s) {
    if (s == "diffuser") return ExpertKind::diffuser;
    if (s == "voice") return ExpertKind::voice;
    throw std::invalid_argument("unknown expert kind '" + s + "' (expected diffuser or voice)");
}

/// A described generative or voice backend living in a pool.
struct Expert {
    std::string id;
    ExpertKind kind = ExpertKind::diffuser;
    std::string description;
    std::vector<std::string> tags;    // lowercase tokens
    std::string payload;              // kind-specific reference, e.g. "model=anime; lambda=0.6"
};

struct Registry {
    ExpertKind kind = ExpertKind::diffuser;
    std::vector<Expert> experts;

    void validate() const {
        if (experts.empty()) throw std::invalid_argument("Registry: must not be empty");
        std::set<std::string> ids;
        for (const auto& e : experts) {
            if (e.id.empty()) throw std::invalid_argument("Registry: expert with empty id");
            if (e.kind != kind) {
                throw std::invalid_argument("Registry: expert '" + e.id + "' has kind " +
                                            to_string(e.kind) + ", registry is " + to_string(kind));
            }
            if (!ids.insert(e.id).second) {
                throw std::invalid_argument("Registry: duplicate expert id '" + e.id + "'");
            }
        }
    }

    const Expert* find(const std::string& id) const {
        for (const auto& e : experts) {
            if (e.id == id) return &e;
        }
        return nullptr;
    }
};

/// Lowercases and splits on non-alphanumeric characters.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char raw : text) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

/// Deterministic tf-idf style scorer over a registry. Documents are the
/// experts' combined tag + description tokens; a description token scores
/// idf * (2 for a tag hit + 1 for a description hit) against each expert,
/// with idf(tok) = ln((1+N)/(1+df)) + 1.
class LexicalScorer {
public:
    explicit LexicalScorer(const Registry& registry) : registry_(&registry) {
        registry.validate();
        expert_tags_.reserve(registry.experts.size());
        expert_desc_.reserve(registry.experts.size());
        for (const auto& e : registry.experts) {
            std::set<std::string> tags;
            for (const auto& t : e.tags) {
                for (const auto& tok : tokenize(t)) tags.insert(tok);
            }
            std::set<std::string> desc;
            for (const auto& tok : tokenize(e.description)) desc.insert(tok);
            expert_tags_.push_back(std::move(tags));
            expert_desc_.push_back(std::move(desc));
        }
    }

    double idf(const std::string& token) const {
        int df = 0;
        for (size_t i = 0; i < expert_tags_.size(); ++i) {
            if (expert_tags_[i].count(token) || expert_desc_[i].count(token)) ++df;
        }
        const double n = static_cast<double>(expert_tags_.size());
        return std::log((1.0 + n) / (1.0 + df)) + 1.0;
    }

    double score(size_t expert_index, const std::string& description) const {
        double total = 0.0;
        for (const auto& tok : tokenize(description)) {
            double match = 0.0;
            if (expert_tags_[expert_index].count(tok)) match += 2.0;
            if (expert_desc_[expert_index].count(tok)) match += 1.0;
            if (match > 0.0) total += idf(tok) * match;
        }
        return total;
    }

    std::vector<double> scores(const std::string& description) const {
        std::vector<double> out(expert_tags_.size());
        for (size_t i = 0; i < out.size(); ++i) out[i] = score(i, description);
        return out;
    }

private:
    const Registry* registry_;
    std::vector<std::set<std::string>> expert_tags_;
    std::vector<std::set<std::string>> expert_desc_;
};

inline double lexical_score(const Registry& registry, const std::string& expert_id,
                            const std::string& description) {
    LexicalScorer scorer(registry);
    for (size_t i = 0; i < registry.experts.size(); ++i) {
        if (registry.experts[i].id == expert_id) return scorer.score(i, description);
    }
    throw std::out_of_range("lexical_score: unknown expert '" + expert_id + "'");
}

enum class SelectorKind { lexical, llm };

struct SelectionResult {
    std::string expert_id;
    SelectorKind used = SelectorKind::lexical;
    bool fallback = false;      // llm selection failed and the lexical path answered
    std::string note;
};

inline std::string selection_prompt(const Registry& registry) {
    std::string text =
        "Pick the single best matching expert for the user description. "
        "Answer with the expert id and nothing else.\nExperts:\n";
    for (const auto& e : registry.experts) {
        text += "- " + e.id + ": " + e.description + "\n";
    }
    return text;
}

/// Selects an expert for a textual description. The lexical path is the
/// deterministic argmax with registry-order tie-break; the llm path asks the
/// client and falls back to lexical on an invalid id or transport failure.
/// By construction the returned id always exists in the registry.
inline SelectionResult select(const Registry& registry, const std::string& description,
                              SelectorKind selector = SelectorKind::lexical,
                              LlmClient* client = nullptr) {
    registry.validate();

    auto lexical_pick = [&]() {
        LexicalScorer scorer(registry);
        std::vector<double> s = scorer.scores(description);
        size_t best = 0;
        for (size_t i = 1; i < s.size(); ++i) {
            if (s[i] > s[best]) best = i;  // ties keep the earliest-listed expert
        }
        return registry.experts[best].id;
    };

    if (selector == SelectorKind::lexical) {
        return {lexical_pick(), SelectorKind::lexical, false, ""};
    }

    std::string reason;
    if (client == nullptr) {
        reason = "no llm client configured";
    } else {
        std::vector<std::string> ids;
        for (const auto& e : registry.experts) ids.push_back(e.id);
        std::optional<std::string> answer = client->choose(selection_prompt(registry), description, ids);
        if (!answer.has_value()) {
            reason = "llm transport error";
        } else if (registry.find(*answer) == nullptr) {
            reason = "llm returned unknown id '" + *answer + "'";
        } else {
            return {*answer, SelectorKind::llm, false, ""};
        }
    }
    return {lexical_pick(), SelectorKind::llm, true, reason};
}

// ---------------------------------------------------------------------------
// Registry files: one [expert] section per expert with id, kind, description,
// tags (comma separated) and payload keys.
// ---------------------------------------------------------------------------

inline Registry registry_from_kv(const KvDoc& doc) {
    Registry reg;
    bool first = true;
    for (const KvSection* sec : doc.all("expert")) {
        Expert e;
        e.id = sec->get("id");
        e.kind = expert_kind_from_string(sec->get("kind"));
        e.description = sec->get_or("description", "");
        e.tags = split_list(sec->get_or("tags", ""));
        e.payload = sec->get_or("payload", "");
        if (first) {
            reg.kind = e.kind;
            first = false;
        }
        reg.experts.push_back(std::move(e));
    }
    reg.validate();
    return reg;
}

inline KvDoc registry_to_kv(const Registry& reg) {
    KvDoc doc;
    for (const auto& e : reg.experts) {
        KvSection sec{"expert", {}};
        sec.entries.emplace_back("id", e.id);
        sec.entries.emplace_back("kind", to_string(e.kind));
        sec.entries.emplace_back("description", e.description);
        std::string tags;
        for (const auto& t : e.tags) {
            if (!tags.empty()) tags += ", ";
            tags += t;
        }
        sec.entries.emplace_back("tags", tags);
        sec.entries.emplace_back("payload", e.payload);
        doc.sections.push_back(std::move(sec));
    }
    return doc;
}

inline Registry load_registry(const std::filesystem::path& path) {
    return registry_from_kv(KvDoc::parse(read_file(path)));
}

/// The default pool of styled portrait backends.
inline Registry builtin_diffuser_registry() {
    Registry reg;
    reg.kind = ExpertKind::diffuser;
    auto add = [&](const char* id, const char* desc, std::vector<std::string> tags, const char* payload) {
        reg.experts.push_back({id, ExpertKind::diffuser, desc, std::move(tags), payload});
    };
    add("game-icon", "Glossy stylized game icon art with bold shapes and vivid colors",
        {"game", "icon", "stylized", "glossy", "emblem"}, "model=icon; lambda=0.6; window=0.4; structural=1.0");
    add("anything-v5", "Anime and manga style characters with cel shading and expressive eyes",
        {"anime", "manga", "cel", "character", "cute"}, "model=anime; lambda=0.6; window=0.4; structural=1.0");
    add("dreamshaper", "Painterly dreamlike fantasy scenes and portraits, soft digital art",
        {"dreamlike", "fantasy", "painterly", "art"}, "model=dream; lambda=0.6; window=0.4; structural=1.0");
    add("3d-animation", "Polished 3d animated film look with soft studio lighting and rendered characters",
        {"3d", "render", "animation", "cgi", "toon"}, "model=render3d; lambda=0.6; window=0.4; structural=1.0");
    add("base-sd15", "General purpose photographic model for realistic people and objects",
        {"photo", "realistic", "general", "portrait"}, "model=photoreal; lambda=0.6; window=0.4; structural=1.0");
    reg.validate();
    return reg;
}

inline Registry builtin_voice_registry() {
    Registry reg;
    reg.kind = ExpertKind::voice;
    auto add = [&](const char* id, const char* desc, std::vector<std::string> tags) {
        reg.experts.push_back({id, ExpertKind::voice, desc, std::move(tags),
                               std::string("voice=") + id});
    };
    add("warm-low", "Warm deep reassuring tone at a slow, steady pace",
        {"warm", "deep", "low", "calm", "male"});
    add("bright-high", "Bright cheerful high tone, quick and energetic",
        {"bright", "high", "cheerful", "energetic", "female"});
    add("calm-mid", "Even mid-range tone, neutral and composed",
        {"calm", "neutral", "mid", "narrator"});
    add("gravel-low", "Rough gravelly low voice with a slow growl",
        {"gravel", "rough", "low", "gruff", "monster"});
    add("airy-high", "Airy light high voice, whispery and playful",
        {"airy", "light", "high", "whisper", "playful", "fairy"});
    reg.validate();
    return reg;
}

}  // namespace avatarkit
