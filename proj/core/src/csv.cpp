#include "hpreg/csv.hpp"

#include <fstream>
#include <sstream>

#include "hpreg/config.hpp"
#include "hpreg/errors.hpp"

namespace hpreg {
namespace {

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return std::string(s.substr(b, s.find_last_not_of(ws) - b + 1));
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto end = line.find(',', start);
    out.push_back(trim(line.substr(start, end == std::string_view::npos ? end : end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace

CsvTable::CsvTable(std::vector<std::string> header, std::vector<std::vector<double>> columns)
    : header_(std::move(header)), columns_(std::move(columns)) {
  if (header_.size() != columns_.size()) fail(ErrorCode::validation, "csv: header/column count mismatch");
  for (const auto& c : columns_) {
    if (c.size() != rows()) fail(ErrorCode::validation, "csv: ragged columns");
  }
}

CsvTable CsvTable::parse(std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (header.empty()) {
      for (const auto& f : fields) {
        if (f.empty()) fail(ErrorCode::validation, origin + ":1: empty column name");
        // A numeric first line means the header row is missing.
        if (f.find_first_not_of("0123456789+-.eE") == std::string::npos) {
          fail(ErrorCode::validation, origin + ": header row is mandatory");
        }
      }
      header = std::move(fields);
      columns.resize(header.size());
      continue;
    }
    if (fields.size() != header.size()) {
      fail(ErrorCode::validation, origin + ":" + std::to_string(line_no) + ": expected " +
                                      std::to_string(header.size()) + " fields");
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      columns[i].push_back(parse_double(fields[i], origin + ":" + std::to_string(line_no)));
    }
  }
  if (header.empty()) fail(ErrorCode::validation, origin + ": empty csv");
  return CsvTable(std::move(header), std::move(columns));
}

CsvTable CsvTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

bool CsvTable::has(std::string_view name) const {
  for (const auto& h : header_) {
    if (h == name) return true;
  }
  return false;
}

const std::vector<double>& CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return columns_[i];
  }
  fail(ErrorCode::validation, "csv: missing column '" + std::string(name) + "'");
}

std::string CsvTable::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + header_[i];
  out += '\n';
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (i) out += ',';
      out += format_double(columns_[i][r]);
    }
    out += '\n';
  }
  return out;
}

void CsvTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << to_string();
  if (!out) fail(ErrorCode::io, "write failed: " + path.string());
}

}  // namespace hpreg
