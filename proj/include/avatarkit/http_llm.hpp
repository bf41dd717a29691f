#pragma once

// Optional HTTP adapter for the LlmClient contract. Only the CLI includes
// this header; tests and the core library stay network-free.

#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "avatarkit/llm.hpp"

namespace avatarkit {

/// Talks to a single JSON endpoint:
///   POST <path>  {"system": ..., "user": ..., "candidates": [...]}
///   reply        {"text": ...} or {"id": ...}
/// Any transport or parse failure returns std::nullopt, which callers treat
/// as a fallback trigger. Calls are serialized; httplib clients are not
/// reentrant.
class HttpLlmClient : public LlmClient {
public:
    HttpLlmClient(std::string host_port, std::string api_key)
        : host_port_(std::move(host_port)), api_key_(std::move(api_key)) {}

    std::optional<std::string> complete(const std::string& system_text,
                                        const std::string& user_text) override {
        nlohmann::json req = {{"system", system_text}, {"user", user_text}};
        auto reply = post(req);
        if (!reply || !reply->contains("text") || !(*reply)["text"].is_string()) return std::nullopt;
        return (*reply)["text"].get<std::string>();
    }

    std::optional<std::string> choose(const std::string& system_text, const std::string& user_text,
                                      const std::vector<std::string>& candidate_ids) override {
        nlohmann::json req = {{"system", system_text}, {"user", user_text}, {"candidates", candidate_ids}};
        auto reply = post(req);
        if (!reply || !reply->contains("id") || !(*reply)["id"].is_string()) return std::nullopt;
        return (*reply)["id"].get<std::string>();
    }

private:
    std::optional<nlohmann::json> post(const nlohmann::json& body) {
        std::lock_guard<std::mutex> lock(mutex_);
        try {
            httplib::Client client(host_port_);
            client.set_connection_timeout(5);
            client.set_read_timeout(30);
            httplib::Headers headers;
            if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
            auto res = client.Post("/v1/select", headers, body.dump(), "application/json");
            if (!res || res->status != 200) return std::nullopt;
            return nlohmann::json::parse(res->body, nullptr, false).is_discarded()
                       ? std::optional<nlohmann::json>{}
                       : std::optional<nlohmann::json>{nlohmann::json::parse(res->body)};
        } catch (...) {
            return std::nullopt;
        }
    }

    std::string host_port_;
    std::string api_key_;
    std::mutex mutex_;
};

}  // namespace avatarkit
