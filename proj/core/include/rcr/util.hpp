#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>

namespace rcr {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// ISO-8601 UTC with second precision, e.g. "2024-05-01T12:30:00Z".
std::string format_utc(std::chrono::system_clock::time_point tp);
std::string now_utc();

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace rcr
