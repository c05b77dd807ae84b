#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace dynloc {

// Flat key = value configuration with bracketed [section] headers and #
// comments. Unknown keys are a hard error with the offending line number;
// every run echoes the fully materialized configuration.
class RunConfig {
 public:
  static RunConfig defaults();
  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const;                // "section.key"
  void set(const std::string& key, const std::string& value);

  const std::string& get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::int64_t get_int64(const std::string& key) const;
  std::uint64_t get_uint64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;  // comma separated
  // "a:b,c:d" pairs.
  std::vector<std::pair<double, double>> get_pair_list(const std::string& key) const;

  // Full configuration, defaults materialized, in schema order.
  std::string resolved_echo() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace dynloc
