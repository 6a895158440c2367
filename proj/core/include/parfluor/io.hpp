#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace parfluor::io {

/// Shortest round-trip decimal representation ('.' separator, no locale).
std::string format_number(double value);
std::string format_optional(const std::optional<double>& value);

/// Writes `content` to a temporary sibling and renames it over `path`, so a
/// reader never observes a partially written file. Creates parent
/// directories. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// 64-bit FNV-1a, used for config fingerprints in manifests.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t value);

}  // namespace parfluor::io
