#include "sgdct/csv.hpp"

#include <cstdio>

#include "sgdct/errors.hpp"

namespace sgdct {

CsvFile::CsvFile(const std::filesystem::path& path, const std::string& schema,
                 const std::vector<std::pair<std::string, std::string>>& meta,
                 const std::string& header_row) {
  std::filesystem::create_directories(path.parent_path());
  out_.open(path);
  if (!out_) throw ConfigError("cannot open output file " + path.string());
  out_ << "# schema=" << schema << ".v" << kSchemaVersion << "\n";
  for (const auto& [key, value] : meta) out_ << "# " << key << "=" << value << "\n";
  out_ << header_row << "\n";
}

void CsvFile::raw_row(const std::string& line) { out_ << line << "\n"; }

void CsvFile::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << "\n";
}

std::string CsvFile::num(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

std::string CsvFile::num(std::size_t value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%zu", value);
  return buf;
}

std::string CsvFile::num(int value) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%d", value);
  return buf;
}

}  // namespace sgdct
