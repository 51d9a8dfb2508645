#include "cccrl/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace cccrl {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open " + tmp.string());
    }
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

void write_csv_atomic(const std::filesystem::path& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::string content;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) content += ',';
    content += header[i];
  }
  content += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) content += ',';
      content += row[i];
    }
    content += '\n';
  }
  write_text_atomic(path, content);
}

}  // namespace cccrl
