#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cccrl {

/// Lossless, locale-independent decimal formatting ('.' separator).
std::string format_double(double v);

/// Writes header + rows to a temp file and renames it into place.
void write_csv_atomic(const std::filesystem::path& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);

void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace cccrl
