#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "rcr/backend.hpp"

namespace rcr {

// On-disk response store, one JSON file per key so concurrent writers need
// no coordination beyond the atomic temp-then-rename write. Entries carry a
// content checksum; a corrupted entry reads as a miss (with a warning) and
// is overwritten by the next store.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& prompt_hash,
             const std::string& text);

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path entry_path(const std::string& key) const;

    std::filesystem::path dir_;
};

// SHA-256 over model_id, temperature, and the canonical conversation bytes,
// so distinct models or sampling settings never share entries.
std::string cache_key(const BackendConfig& cfg, const Conversation& conv);

// Returns the cached text (cached=true, no backend call) on a hit; otherwise
// completes through the backend and stores the result.
Completion cached_complete(const Conversation& conv, const BackendConfig& cfg,
                           ResponseCache& cache, Backend& backend);

}  // namespace rcr
