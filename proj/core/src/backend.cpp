#include "rcr/backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "rcr/error.hpp"
#include "rcr/sha256.hpp"
#include "rcr/util.hpp"

namespace rcr {

void validate(const BackendConfig& cfg) {
    if (cfg.temperature < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "temperature must be >= 0");
    }
    if (cfg.max_tokens <= 0) {
        throw Error(ErrorKind::InvalidArgument, "max_tokens must be positive");
    }
    if (cfg.max_retries < 0 || cfg.max_retries > 10) {
        throw Error(ErrorKind::InvalidArgument, "max_retries must be in [0, 10]");
    }
    if (cfg.requests_per_minute <= 0) {
        throw Error(ErrorKind::InvalidArgument, "requests_per_minute must be positive");
    }
    if (cfg.timeout.count() <= 0) {
        throw Error(ErrorKind::InvalidArgument, "timeout must be positive");
    }
    if (cfg.wire_format != "chat" && cfg.wire_format != "text") {
        throw Error(ErrorKind::InvalidArgument,
                    "wire_format must be \"chat\" or \"text\", got \"" +
                        cfg.wire_format + "\"");
    }
}

nlohmann::ordered_json backend_config_to_json(const BackendConfig& cfg) {
    nlohmann::ordered_json j;
    j["endpoint_url"] = cfg.endpoint_url;
    j["model_id"] = cfg.model_id;
    j["temperature"] = cfg.temperature;
    j["max_tokens"] = cfg.max_tokens;
    j["timeout_ms"] = cfg.timeout.count();
    j["max_retries"] = cfg.max_retries;
    j["requests_per_minute"] = cfg.requests_per_minute;
    j["api_key_ref"] = cfg.api_key_ref;
    j["wire_format"] = cfg.wire_format;
    j["response_text_path"] = cfg.response_text_path;
    return j;
}

BackendConfig backend_config_from_json(const nlohmann::json& j) {
    BackendConfig cfg;
    cfg.endpoint_url = j.value("endpoint_url", cfg.endpoint_url);
    cfg.model_id = j.value("model_id", cfg.model_id);
    cfg.temperature = j.value("temperature", cfg.temperature);
    cfg.max_tokens = j.value("max_tokens", cfg.max_tokens);
    cfg.timeout = std::chrono::milliseconds(j.value("timeout_ms", cfg.timeout.count()));
    cfg.max_retries = j.value("max_retries", cfg.max_retries);
    cfg.requests_per_minute = j.value("requests_per_minute", cfg.requests_per_minute);
    cfg.api_key_ref = j.value("api_key_ref", cfg.api_key_ref);
    cfg.wire_format = j.value("wire_format", cfg.wire_format);
    cfg.response_text_path = j.value("response_text_path", cfg.response_text_path);
    validate(cfg);
    return cfg;
}

std::string canonical_serialize(const Conversation& conv) {
    std::string out;
    for (std::size_t i = 0; i < conv.size(); ++i) {
        if (i > 0) out += "\n---\n";
        out += to_string(conv[i].role);
        out += ':';
        out += conv[i].content;
    }
    return out;
}

std::string prompt_hash(const Conversation& conv) {
    return sha256_hex(canonical_serialize(conv));
}

ScriptedBackend::ScriptedBackend(std::map<std::string, std::string> responses)
    : responses_(std::move(responses)) {}

ScriptedBackend ScriptedBackend::load(const std::filesystem::path& script_path) {
    std::map<std::string, std::string> responses;
    std::istringstream lines(read_file(script_path));
    std::string line;
    int line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json entry;
        try {
            entry = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::SchemaViolation,
                        script_path.string() + ":" + std::to_string(line_no) + ": " +
                            e.what());
        }
        if (!entry.contains("hash") || !entry.contains("response")) {
            throw Error(ErrorKind::SchemaViolation,
                        script_path.string() + ":" + std::to_string(line_no) +
                            ": expected keys \"hash\" and \"response\"");
        }
        const auto hash = entry.at("hash").get<std::string>();
        if (hash.size() != 64 ||
            hash.find_first_not_of("0123456789abcdef") != std::string::npos) {
            throw Error(ErrorKind::SchemaViolation,
                        script_path.string() + ":" + std::to_string(line_no) +
                            ": \"hash\" must be 64 lowercase hex characters");
        }
        if (!responses.emplace(hash, entry.at("response").get<std::string>()).second) {
            throw Error(ErrorKind::DuplicateKey,
                        script_path.string() + ":" + std::to_string(line_no) +
                            ": duplicate hash " + hash);
        }
    }
    return ScriptedBackend(std::move(responses));
}

Completion ScriptedBackend::complete(const Conversation& conv) {
    validate_conversation(conv);
    const std::string hash = prompt_hash(conv);
    const auto it = responses_.find(hash);
    if (it == responses_.end()) {
        throw Error(ErrorKind::MalformedResponse,
                    "no scripted response for prompt " + hash)
            .with_prompt_hash(hash);
    }
    Completion c;
    c.text = it->second;
    c.prompt_hash = hash;
    return c;
}

TokenBucket::TokenBucket(int per_minute, std::function<TimePoint()> now_fn)
    : now_(now_fn ? std::move(now_fn)
                  : [] { return std::chrono::steady_clock::now(); }),
      tokens_(per_minute),
      capacity_(per_minute),
      per_second_(per_minute / 60.0),
      last_(now_()) {}

std::chrono::milliseconds TokenBucket::acquire() {
    std::lock_guard<std::mutex> lock(mu_);
    const TimePoint now = now_();
    const double elapsed =
        std::chrono::duration_cast<std::chrono::duration<double>>(now - last_).count();
    tokens_ = std::min(capacity_, tokens_ + elapsed * per_second_);
    last_ = now;
    tokens_ -= 1.0;
    if (tokens_ >= 0.0) return std::chrono::milliseconds(0);
    return std::chrono::milliseconds(
        static_cast<long long>(std::ceil(-tokens_ / per_second_ * 1000.0)));
}

namespace {

// endpoint_url -> (scheme://host[:port], /path)
std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorKind::InvalidArgument,
                    "endpoint_url needs a scheme, got \"" + url + "\"");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool timeout_error(httplib::Error e) {
    return e == httplib::Error::ConnectionTimeout || e == httplib::Error::Read ||
           e == httplib::Error::Write;
}

}  // namespace

HttpBackend::HttpBackend(BackendConfig cfg, HttpHooks hooks)
    : cfg_(std::move(cfg)),
      hooks_(std::move(hooks)),
      limiter_(cfg_.requests_per_minute, hooks_.now) {
    validate(cfg_);
    if (!hooks_.sleep) {
        hooks_.sleep = [](std::chrono::milliseconds d) {
            std::this_thread::sleep_for(d);
        };
    }
    if (!hooks_.jitter) {
        hooks_.jitter = [] {
            thread_local std::mt19937_64 rng{std::random_device{}()};
            return std::uniform_real_distribution<double>(-0.2, 0.2)(rng);
        };
    }
    std::tie(host_, path_) = split_url(cfg_.endpoint_url);
}

std::string HttpBackend::request_body(const Conversation& conv) const {
    nlohmann::ordered_json body;
    body["model"] = cfg_.model_id;
    body["temperature"] = cfg_.temperature;
    body["max_tokens"] = cfg_.max_tokens;
    if (cfg_.wire_format == "chat") {
        auto messages = nlohmann::ordered_json::array();
        for (const auto& m : conv) {
            messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
        }
        body["messages"] = std::move(messages);
    } else {
        std::string prompt;
        for (std::size_t i = 0; i < conv.size(); ++i) {
            if (i > 0) prompt += '\n';
            prompt += conv[i].content;
        }
        body["prompt"] = std::move(prompt);
    }
    return body.dump();
}

Completion HttpBackend::complete(const Conversation& conv) {
    validate_conversation(conv);
    const std::string hash = prompt_hash(conv);

    std::string bearer;
    if (!cfg_.api_key_ref.empty()) {
        const char* value = std::getenv(cfg_.api_key_ref.c_str());
        if (value == nullptr || *value == '\0') {
            throw Error(ErrorKind::AuthMissing,
                        "environment variable " + cfg_.api_key_ref + " is not set")
                .with_prompt_hash(hash);
        }
        bearer = value;
    }

    const std::string body = request_body(conv);
    const auto started = std::chrono::steady_clock::now();

    for (int attempt = 1;; ++attempt) {
        const auto wait = limiter_.acquire();
        if (wait.count() > 0) hooks_.sleep(wait);

        httplib::Client client(host_);
        client.set_connection_timeout(cfg_.timeout);
        client.set_read_timeout(cfg_.timeout);
        client.set_write_timeout(cfg_.timeout);
        httplib::Headers headers;
        if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);

        auto res = client.Post(path_, headers, body, "application/json");

        ErrorKind kind = ErrorKind::Transport;
        std::string detail;
        bool retryable = true;
        if (res) {
            if (res->status >= 200 && res->status < 300) {
                nlohmann::json parsed;
                try {
                    parsed = nlohmann::json::parse(res->body);
                } catch (const nlohmann::json::exception&) {
                    throw Error(ErrorKind::MalformedResponse,
                                "response body is not JSON")
                        .with_prompt_hash(hash);
                }
                const nlohmann::json::json_pointer ptr(cfg_.response_text_path);
                if (!parsed.contains(ptr) || !parsed.at(ptr).is_string()) {
                    throw Error(ErrorKind::MalformedResponse,
                                "no text at " + cfg_.response_text_path +
                                    " in response")
                        .with_prompt_hash(hash);
                }
                Completion c;
                c.text = parsed.at(ptr).get<std::string>();
                c.prompt_hash = hash;
                c.latency_ms =
                    std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(
                        std::chrono::steady_clock::now() - started)
                        .count();
                c.attempt_count = attempt;
                return c;
            }
            detail = "HTTP " + std::to_string(res->status);
            if (res->status == 429) {
                kind = ErrorKind::RateLimited;
            } else if (res->status >= 500) {
                kind = ErrorKind::Transport;
            } else {
                kind = ErrorKind::Transport;
                retryable = false;
            }
        } else {
            detail = httplib::to_string(res.error());
            kind = timeout_error(res.error()) ? ErrorKind::Timeout
                                              : ErrorKind::Transport;
        }

        if (!retryable || attempt > cfg_.max_retries) {
            throw Error(kind, detail + " from " + cfg_.endpoint_url)
                .with_prompt_hash(hash);
        }
        const double backoff_ms = 1000.0 * std::pow(2.0, attempt - 1);
        const double jittered = backoff_ms * (1.0 + hooks_.jitter());
        hooks_.sleep(std::chrono::milliseconds(
            static_cast<long long>(std::max(0.0, jittered))));
    }
}

}  // namespace rcr
