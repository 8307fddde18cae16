#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace thinktank::persistence {

/// Write-temp, fsync, rename, fsync-dir. Readers see the old or the new file, never a mix.
void atomic_write_file(const std::filesystem::path& path, std::string_view bytes);

/// Throws Error(not_found) when the file is missing.
std::string read_file(const std::filesystem::path& path);

void fsync_directory(const std::filesystem::path& dir);

/// Little-endian float32 packing used by every vector file.
std::string pack_f32_le(std::span<const float> values);
std::vector<float> unpack_f32_le(std::string_view bytes);

}  // namespace thinktank::persistence
