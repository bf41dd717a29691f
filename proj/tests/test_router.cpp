#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>

#include "avatarkit/router.hpp"

using namespace avatarkit;

namespace {

// Independent score recomputation: hand tokenization (simple state machine
// kept separate from the library tokenizer) and the documented formula.
double oracle_score(const Registry& reg, size_t expert, const std::string& description) {
    auto toks = [](const std::string& text) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : text) {
            if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
                cur += c;
            } else if (c >= 'A' && c <= 'Z') {
                cur += static_cast<char>(c - 'A' + 'a');
            } else if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        }
        if (!cur.empty()) out.push_back(cur);
        return out;
    };

    std::vector<std::set<std::string>> tag_docs, desc_docs;
    for (const auto& e : reg.experts) {
        std::set<std::string> tags;
        for (const auto& t : e.tags) {
            for (const auto& tk : toks(t)) tags.insert(tk);
        }
        tag_docs.push_back(tags);
        std::set<std::string> d;
        for (const auto& tk : toks(e.description)) d.insert(tk);
        desc_docs.push_back(d);
    }

    double total = 0.0;
    for (const auto& tk : toks(description)) {
        int df = 0;
        for (size_t i = 0; i < reg.experts.size(); ++i) {
            if (tag_docs[i].count(tk) || desc_docs[i].count(tk)) ++df;
        }
        double idf = std::log((1.0 + reg.experts.size()) / (1.0 + df)) + 1.0;
        double match = 0.0;
        if (tag_docs[expert].count(tk)) match += 2.0;
        if (desc_docs[expert].count(tk)) match += 1.0;
        total += idf * match;
    }
    return total;
}

struct StubClient : LlmClient {
    std::optional<std::string> complete_reply;
    std::optional<std::string> choose_reply;
    int choose_calls = 0;

    std::optional<std::string> complete(const std::string&, const std::string&) override {
        return complete_reply;
    }
    std::optional<std::string> choose(const std::string&, const std::string&,
                                      const std::vector<std::string>&) override {
        ++choose_calls;
        return choose_reply;
    }
};

}  // namespace

TEST_CASE("tokenizer lowercases and splits on non-alphanumerics") {
    auto t = tokenize("A cute-ANIME  schoolgirl! v5");
    REQUIRE(t.size() == 5);
    CHECK(t[0] == "a");
    CHECK(t[1] == "cute");
    CHECK(t[2] == "anime");
    CHECK(t[3] == "schoolgirl");
    CHECK(t[4] == "v5");
    CHECK(tokenize("").empty());
    CHECK(tokenize("!!! ---").empty());
}

TEST_CASE("lexical scores match the hand-computed oracle on the 5-expert pool") {
    Registry reg = builtin_diffuser_registry();
    LexicalScorer scorer(reg);

    SECTION("anime description") {
        const std::string desc = "a cute anime schoolgirl";
        std::vector<double> s = scorer.scores(desc);
        // frozen from the independent oracle
        CHECK(s[0] == Catch::Approx(0.0).margin(1e-9));
        CHECK(s[1] == Catch::Approx(10.493061443340551).margin(1e-9));
        CHECK(s[2] == Catch::Approx(0.0).margin(1e-9));
        CHECK(s[3] == Catch::Approx(0.0).margin(1e-9));
        CHECK(s[4] == Catch::Approx(0.0).margin(1e-9));
        for (size_t i = 0; i < s.size(); ++i) {
            CHECK(s[i] == Catch::Approx(oracle_score(reg, i, desc)).margin(1e-9));
        }
        CHECK(select(reg, desc).expert_id == "anything-v5");
    }

    SECTION("painterly description spreads over several experts") {
        const std::string desc = "soft painterly fantasy portrait art";
        std::vector<double> s = scorer.scores(desc);
        CHECK(s[0] == Catch::Approx(1.6931471805599454).margin(1e-9));
        CHECK(s[1] == Catch::Approx(0.0).margin(1e-9));
        CHECK(s[2] == Catch::Approx(19.36426245424844).margin(1e-9));
        CHECK(s[3] == Catch::Approx(1.6931471805599454).margin(1e-9));
        CHECK(s[4] == Catch::Approx(4.19722457733622).margin(1e-9));
        for (size_t i = 0; i < s.size(); ++i) {
            CHECK(s[i] == Catch::Approx(oracle_score(reg, i, desc)).margin(1e-9));
        }
        CHECK(select(reg, desc).expert_id == "dreamshaper");
    }
}

TEST_CASE("empty description scores zero everywhere and picks the first expert") {
    Registry reg = builtin_diffuser_registry();
    LexicalScorer scorer(reg);
    for (double s : scorer.scores("")) CHECK(s == 0.0);
    SelectionResult sel = select(reg, "");
    CHECK(sel.expert_id == reg.experts.front().id);
    CHECK_FALSE(sel.fallback);
}

TEST_CASE("a verbatim tag beats experts without the token") {
    Registry reg = builtin_diffuser_registry();
    LexicalScorer scorer(reg);
    std::vector<double> s = scorer.scores("emblem");
    for (size_t i = 1; i < s.size(); ++i) {
        CHECK(s[0] > s[i]);
    }
}

TEST_CASE("single-expert registries always select that expert") {
    Registry reg;
    reg.kind = ExpertKind::voice;
    reg.experts.push_back({"only", ExpertKind::voice, "the single option", {"solo"}, "voice=only"});
    CHECK(select(reg, "anything at all").expert_id == "only");
    StubClient client;
    client.choose_reply = "only";
    CHECK(select(reg, "whatever", SelectorKind::llm, &client).expert_id == "only");
}

TEST_CASE("permuting the registry never changes a unique argmax") {
    Registry reg = builtin_diffuser_registry();
    const std::string desc = "soft painterly fantasy portrait art";
    std::string baseline = select(reg, desc).expert_id;

    Registry rotated = reg;
    std::rotate(rotated.experts.begin(), rotated.experts.begin() + 2, rotated.experts.end());
    CHECK(select(rotated, desc).expert_id == baseline);

    Registry reversed = reg;
    std::reverse(reversed.experts.begin(), reversed.experts.end());
    CHECK(select(reversed, desc).expert_id == baseline);
}

TEST_CASE("exact ties go to the earliest listed expert") {
    Registry reg;
    reg.kind = ExpertKind::diffuser;
    reg.experts.push_back({"first", ExpertKind::diffuser, "blue style", {"blue"}, "model=photoreal"});
    reg.experts.push_back({"second", ExpertKind::diffuser, "blue style", {"blue"}, "model=photoreal"});
    CHECK(select(reg, "blue").expert_id == "first");

    std::swap(reg.experts[0], reg.experts[1]);
    CHECK(select(reg, "blue").expert_id == "second");
}

TEST_CASE("scaling all scores by a positive constant keeps the argmax") {
    Registry reg = builtin_diffuser_registry();
    LexicalScorer scorer(reg);
    std::vector<double> s = scorer.scores("soft painterly fantasy portrait art");
    size_t best = 0;
    for (size_t i = 1; i < s.size(); ++i) {
        if (s[i] > s[best]) best = i;
    }
    for (double c : {0.5, 3.0, 1e6}) {
        size_t scaled_best = 0;
        for (size_t i = 1; i < s.size(); ++i) {
            if (c * s[i] > c * s[scaled_best]) scaled_best = i;
        }
        CHECK(scaled_best == best);
    }
}

TEST_CASE("llm selection validates ids and falls back safely") {
    Registry reg = builtin_diffuser_registry();

    SECTION("valid reply is used verbatim") {
        StubClient client;
        client.choose_reply = "dreamshaper";
        SelectionResult sel = select(reg, "a cute anime schoolgirl", SelectorKind::llm, &client);
        CHECK(sel.expert_id == "dreamshaper");
        CHECK_FALSE(sel.fallback);
        CHECK(client.choose_calls == 1);
    }
    SECTION("unknown id falls back to the lexical result") {
        StubClient client;
        client.choose_reply = "nonexistent-id";
        SelectionResult sel = select(reg, "a cute anime schoolgirl", SelectorKind::llm, &client);
        CHECK(sel.expert_id == "anything-v5");
        CHECK(sel.fallback);
        CHECK(sel.note.find("nonexistent-id") != std::string::npos);
    }
    SECTION("transport failure falls back") {
        StubClient client;
        client.choose_reply = std::nullopt;
        SelectionResult sel = select(reg, "a cute anime schoolgirl", SelectorKind::llm, &client);
        CHECK(sel.expert_id == "anything-v5");
        CHECK(sel.fallback);
    }
    SECTION("missing client falls back") {
        SelectionResult sel = select(reg, "a cute anime schoolgirl", SelectorKind::llm, nullptr);
        CHECK(sel.expert_id == "anything-v5");
        CHECK(sel.fallback);
    }
}

TEST_CASE("registry files round trip and validate") {
    Registry reg = builtin_diffuser_registry();
    KvDoc doc = registry_to_kv(reg);
    Registry back = registry_from_kv(KvDoc::parse(doc.to_string()));
    REQUIRE(back.experts.size() == reg.experts.size());
    for (size_t i = 0; i < reg.experts.size(); ++i) {
        CHECK(back.experts[i].id == reg.experts[i].id);
        CHECK(back.experts[i].description == reg.experts[i].description);
        CHECK(back.experts[i].tags == reg.experts[i].tags);
        CHECK(back.experts[i].payload == reg.experts[i].payload);
    }

    Registry dup = reg;
    dup.experts.push_back(dup.experts.front());
    CHECK_THROWS_AS(dup.validate(), std::invalid_argument);

    Registry mixed = reg;
    mixed.experts[1].kind = ExpertKind::voice;
    CHECK_THROWS_AS(mixed.validate(), std::invalid_argument);
}

TEST_CASE("shipped registry files match the built-in pools") {
    Registry diff = load_registry(std::string(AVATARKIT_SOURCE_DIR) + "/data/registries/diffusers.cfg");
    Registry builtin = builtin_diffuser_registry();
    REQUIRE(diff.experts.size() == builtin.experts.size());
    for (size_t i = 0; i < diff.experts.size(); ++i) {
        CHECK(diff.experts[i].id == builtin.experts[i].id);
        CHECK(diff.experts[i].payload == builtin.experts[i].payload);
    }

    Registry voices = load_registry(std::string(AVATARKIT_SOURCE_DIR) + "/data/registries/voices.cfg");
    Registry vb = builtin_voice_registry();
    REQUIRE(voices.experts.size() == vb.experts.size());
    for (size_t i = 0; i < voices.experts.size(); ++i) {
        CHECK(voices.experts[i].id == vb.experts[i].id);
    }
}
