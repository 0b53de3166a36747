#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace sgdct {

inline constexpr const char* kSchemaVersion = "1";

// RFC-4180-style CSV with a '#' comment prelude carrying the schema tag, the
// resolved config, the master seed and the flagged-path count. '.' decimal
// separator, locale-free.
class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::string& schema,
          const std::vector<std::pair<std::string, std::string>>& meta,
          const std::string& header_row);

  void raw_row(const std::string& line);
  void row(const std::vector<std::string>& fields);

  static std::string num(double value);
  static std::string num(std::size_t value);
  static std::string num(int value);

 private:
  std::ofstream out_;
};

}  // namespace sgdct
