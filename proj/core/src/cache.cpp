#include "rcr/cache.hpp"

#include <cstdio>
#include <iostream>

#include <nlohmann/json.hpp>

#include "rcr/error.hpp"
#include "rcr/sha256.hpp"
#include "rcr/util.hpp"

namespace rcr {

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) {
        throw Error(ErrorKind::CacheIo,
                    "cannot create cache directory " + dir_.string() + ": " +
                        ec.message());
    }
}

std::filesystem::path ResponseCache::entry_path(const std::string& key) const {
    return dir_ / (key + ".json");
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
    const auto path = entry_path(key);
    if (!std::filesystem::exists(path)) return std::nullopt;

    nlohmann::json entry;
    try {
        entry = nlohmann::json::parse(read_file(path));
    } catch (const std::exception&) {
        std::cerr << "warning: unreadable cache entry " << path.string()
                  << ", treating as miss\n";
        return std::nullopt;
    }
    if (!entry.contains("response") || !entry.contains("checksum") ||
        !entry["response"].is_string() ||
        entry["checksum"] != sha256_hex(entry["response"].get<std::string>())) {
        std::cerr << "warning: corrupted cache entry " << path.string()
                  << ", treating as miss\n";
        return std::nullopt;
    }
    return entry["response"].get<std::string>();
}

void ResponseCache::put(const std::string& key, const std::string& prompt_hash,
                        const std::string& text) {
    nlohmann::ordered_json entry;
    entry["key"] = key;
    entry["prompt_hash"] = prompt_hash;
    entry["response"] = text;
    entry["checksum"] = sha256_hex(text);
    try {
        write_file_atomic(entry_path(key), entry.dump(2) + "\n");
    } catch (const Error& e) {
        throw Error(ErrorKind::CacheIo, e.message());
    }
}

std::string cache_key(const BackendConfig& cfg, const Conversation& conv) {
    char temperature[32];
    std::snprintf(temperature, sizeof temperature, "%.6f", cfg.temperature);
    std::string material = cfg.model_id;
    material += '\x1f';
    material += temperature;
    material += '\x1f';
    material += canonical_serialize(conv);
    return sha256_hex(material);
}

Completion cached_complete(const Conversation& conv, const BackendConfig& cfg,
                           ResponseCache& cache, Backend& backend) {
    const std::string key = cache_key(cfg, conv);
    if (auto hit = cache.get(key)) {
        Completion c;
        c.text = std::move(*hit);
        c.prompt_hash = prompt_hash(conv);
        c.cached = true;
        c.attempt_count = 0;
        return c;
    }
    Completion c = backend.complete(conv);
    cache.put(key, c.prompt_hash, c.text);
    return c;
}

}  // namespace rcr
