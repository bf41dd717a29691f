#pragma once

#include <optional>
#include <string>
#include <vector>

namespace avatarkit {

/// Adapter boundary to an external language-model service. Implementations
/// return std::nullopt on transport failure; callers fall back to
/// deterministic paths and never crash on it.
struct LlmClient {
    virtual ~LlmClient() = default;

    /// Free-form completion for a (system, user) prompt pair.
    virtual std::optional<std::string> complete(const std::string& system_text,
                                                const std::string& user_text) = 0;

    /// Pick one id out of the candidates. The returned string is still
    /// validated against the candidate list by the caller.
    virtual std::optional<std::string> choose(const std::string& system_text,
                                              const std::string& user_text,
                                              const std::vector<std::string>& candidate_ids) = 0;
};

}  // namespace avatarkit
