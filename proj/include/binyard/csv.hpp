#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace binyard {

/// Marker written in place of a statistic that has no defined value.
inline constexpr const char* kUndefined = "undefined";

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double x);
std::string format_optional(const std::optional<double>& x);

/// Comma-separated writer with a header row. Throws on IO failure, naming the path.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws if absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace binyard
