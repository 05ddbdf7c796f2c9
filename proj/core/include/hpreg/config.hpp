#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hpreg {

/// One `[name]` block of a key-value config file. Keys before the first
/// header belong to the root section, whose name is empty.
class ConfigSection {
 public:
  ConfigSection(std::string name, int line) : name_(std::move(name)), line_(line) {}

  const std::string& name() const noexcept { return name_; }
  int line() const noexcept { return line_; }

  bool has(const std::string& key) const { return values_.contains(key); }
  void set(const std::string& key, std::string value, int line);

  std::string get(const std::string& key) const;
  std::string get_or(const std::string& key, std::string fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key) const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::string where(const std::string& key) const;

  std::string name_;
  int line_;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
};

/// Parsed key-value text. Syntax: `key = value` lines, `#` comments, and
/// `[block]` headers that may repeat (e.g. one `[component]` per noise term).
class ConfigDocument {
 public:
  static ConfigDocument parse(std::string_view text, std::string origin = "<string>");
  static ConfigDocument load(const std::filesystem::path& path);

  const ConfigSection& root() const { return sections_.front(); }
  std::vector<const ConfigSection*> blocks(std::string_view name) const;
  const std::string& origin() const noexcept { return origin_; }

 private:
  std::string origin_;
  std::vector<ConfigSection> sections_;
};

double parse_double(std::string_view text, std::string_view context);
std::vector<double> parse_double_list(std::string_view text, std::string_view context);
std::string format_double(double value);

}  // namespace hpreg
