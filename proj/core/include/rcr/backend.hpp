#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "rcr/prompts.hpp"

namespace rcr {

struct BackendConfig {
    std::string endpoint_url;
    std::string model_id;
    double temperature = 0.0;
    int max_tokens = 256;
    std::chrono::milliseconds timeout{30000};
    int max_retries = 3;
    int requests_per_minute = 60;
    // Name of the environment variable holding the credential. The credential
    // itself never enters configs, manifests, or transcripts.
    std::string api_key_ref;
    // "chat" posts role-tagged messages; "text" posts a flattened prompt.
    std::string wire_format = "chat";
    // JSON pointer to the completion text in the endpoint's response.
    std::string response_text_path = "/choices/0/message/content";
};

void validate(const BackendConfig& cfg);  // throws Error on out-of-range fields
nlohmann::ordered_json backend_config_to_json(const BackendConfig& cfg);
BackendConfig backend_config_from_json(const nlohmann::json& j);

struct Completion {
    std::string text;
    std::string prompt_hash;
    bool cached = false;
    double latency_ms = 0.0;
    int attempt_count = 1;
};

// "role:content" per message, joined by "\n---\n", no trailing separator.
// Injective as long as message contents avoid the separator sequence, which
// scripted fixtures are required to do.
std::string canonical_serialize(const Conversation& conv);
std::string prompt_hash(const Conversation& conv);

class Backend {
public:
    virtual ~Backend() = default;
    virtual Completion complete(const Conversation& conv) = 0;
    // True when repeated completions of one conversation are byte-identical.
    virtual bool deterministic() const = 0;
};

// Replays canned responses keyed by prompt hash, for tests and offline runs.
// Script files are JSON Lines of {"hash": 64-hex, "response": string}.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::map<std::string, std::string> responses);
    static ScriptedBackend load(const std::filesystem::path& script_path);

    Completion complete(const Conversation& conv) override;
    bool deterministic() const override { return true; }
    std::size_t size() const { return responses_.size(); }

private:
    std::map<std::string, std::string> responses_;
};

// Shared limiter handing out send slots at requests_per_minute. acquire()
// never blocks; it returns how long the caller must wait. Deficits queue
// fairly across threads. Clock is injectable for tests.
class TokenBucket {
public:
    using TimePoint = std::chrono::steady_clock::time_point;

    explicit TokenBucket(int per_minute, std::function<TimePoint()> now_fn = {});
    std::chrono::milliseconds acquire();

private:
    std::mutex mu_;
    std::function<TimePoint()> now_;
    double tokens_;
    double capacity_;
    double per_second_;
    TimePoint last_;
};

// Test seams for the HTTP client: sleeping, backoff jitter, and the clock.
struct HttpHooks {
    std::function<void(std::chrono::milliseconds)> sleep;
    std::function<double()> jitter;  // multiplier offset in [-0.2, 0.2]
    std::function<TokenBucket::TimePoint()> now;
};

// Chat-completion client with bounded retries (exponential backoff, jittered)
// for timeouts, transport failures, 429 and 5xx. The credential is read from
// the environment on every call, before any network activity.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(BackendConfig cfg, HttpHooks hooks = {});

    Completion complete(const Conversation& conv) override;
    bool deterministic() const override { return false; }

private:
    std::string request_body(const Conversation& conv) const;

    BackendConfig cfg_;
    HttpHooks hooks_;
    TokenBucket limiter_;
    std::string host_;
    std::string path_;
};

}  // namespace rcr
