#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace lexlearn {

/// Replace `path` with `contents` by writing a sibling temp file, flushing it
/// and renaming it over the target. Readers see either the old or the new
/// file, never a partial one. Throws StorageUnavailable.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Whole-file read; throws StorageUnavailable when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Current UTC time as ISO-8601 with millisecond precision, e.g.
/// "2026-10-19T07:50:00.123Z".
std::string utc_timestamp();

}  // namespace lexlearn
