#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace rmtedge {

/// %.17g, enough digits to round-trip any double.
std::string format_double(double v);

/// Comma separated output with a header row. Numeric cells use format_double.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  void row(const std::vector<double>& cells);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
};

/// Rows of a numeric CSV with one header line; '#' lines are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // throws if absent
};

CsvTable read_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace rmtedge
