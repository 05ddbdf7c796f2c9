#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hpreg {

/// Numeric CSV with a mandatory header row, stored column-major.
class CsvTable {
 public:
  CsvTable() = default;
  CsvTable(std::vector<std::string> header, std::vector<std::vector<double>> columns);

  static CsvTable parse(std::string_view text, const std::string& origin = "<string>");
  static CsvTable load(const std::filesystem::path& path);

  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t rows() const noexcept { return columns_.empty() ? 0 : columns_.front().size(); }
  bool has(std::string_view name) const;
  const std::vector<double>& column(std::string_view name) const;

  std::string to_string() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> columns_;
};

}  // namespace hpreg
