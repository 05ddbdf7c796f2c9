#include "hpreg/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hpreg/errors.hpp"

namespace hpreg {
namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace

double parse_double(std::string_view text, std::string_view context) {
  const auto s = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    fail(ErrorCode::validation,
         std::string(context) + ": expected a number, got '" + std::string(s) + "'");
  }
  return value;
}

std::vector<double> parse_double_list(std::string_view text, std::string_view context) {
  std::vector<double> out;
  auto s = trim(text);
  if (!s.empty() && s.front() == '[' && s.back() == ']') s = trim(s.substr(1, s.size() - 2));
  if (s.empty()) return out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string_view::npos) end = s.size();
    out.push_back(parse_double(s.substr(start, end - start), context));
    start = end + 1;
  }
  return out;
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void ConfigSection::set(const std::string& key, std::string value, int line) {
  values_[key] = std::move(value);
  lines_[key] = line;
}

std::string ConfigSection::where(const std::string& key) const {
  std::string s = name_.empty() ? std::string("root") : "[" + name_ + "]";
  if (auto it = lines_.find(key); it != lines_.end()) s += " line " + std::to_string(it->second);
  return s + " key '" + key + "'";
}

std::string ConfigSection::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    fail(ErrorCode::validation, "missing key '" + key + "' in " +
                                    (name_.empty() ? std::string("root") : "[" + name_ + "]") +
                                    " (line " + std::to_string(line_) + ")");
  }
  return it->second;
}

std::string ConfigSection::get_or(const std::string& key, std::string fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double ConfigSection::get_double(const std::string& key) const {
  return parse_double(get(key), where(key));
}

double ConfigSection::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long ConfigSection::get_int(const std::string& key) const {
  const auto s = trim(get(key));
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    fail(ErrorCode::validation, where(key) + ": expected an integer");
  }
  return value;
}

long long ConfigSection::get_int_or(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool ConfigSection::get_bool_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto s = std::string(trim(get(key)));
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(ErrorCode::validation, where(key) + ": expected a boolean");
}

std::vector<double> ConfigSection::get_list(const std::string& key) const {
  return parse_double_list(get(key), where(key));
}

ConfigDocument ConfigDocument::parse(std::string_view text, std::string origin) {
  ConfigDocument doc;
  doc.origin_ = std::move(origin);
  doc.sections_.emplace_back("", 0);

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = std::string_view(raw);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        fail(ErrorCode::validation,
             doc.origin_ + ":" + std::to_string(line_no) + ": unterminated block header");
      }
      auto name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) {
        fail(ErrorCode::validation, doc.origin_ + ":" + std::to_string(line_no) + ": empty block name");
      }
      doc.sections_.emplace_back(std::string(name), line_no);
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::validation,
           doc.origin_ + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) {
      fail(ErrorCode::validation, doc.origin_ + ":" + std::to_string(line_no) + ": empty key");
    }
    auto& section = doc.sections_.back();
    if (section.has(std::string(key))) {
      fail(ErrorCode::validation, doc.origin_ + ":" + std::to_string(line_no) + ": duplicate key '" +
                                      std::string(key) + "'");
    }
    section.set(std::string(key), std::string(value), line_no);
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::vector<const ConfigSection*> ConfigDocument::blocks(std::string_view name) const {
  std::vector<const ConfigSection*> out;
  for (const auto& s : sections_) {
    if (s.name() == name) out.push_back(&s);
  }
  return out;
}

}  // namespace hpreg
