#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gpss {

/// Write content to path atomically (temp file in the same directory,
/// then rename). Creates parent directories. Throws IoError.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

/// CSV with 17 significant digits, '.' decimal, ',' separator, LF endings.
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns);

std::string format_g17(double x);

/// FNV-1a 64-bit hash of a string, hex-encoded; used for cache keys.
std::string fnv1a_hex(const std::string& s);

} // namespace gpss
