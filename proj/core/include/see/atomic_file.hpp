#pragma once

#include <filesystem>
#include <string_view>

namespace see {

/// Writes `content` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partial file. Creates missing parent
/// directories. Throws std::runtime_error on I/O failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace see
