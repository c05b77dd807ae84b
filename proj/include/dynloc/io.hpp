#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dynloc {

// Shortest-of-17-significant-digits decimal form, locale independent.
std::string format_double(double v);

std::string sha256_hex(const std::string& bytes);

// Write-to-temp-then-rename; no reader ever sees a partial file.
void atomic_write_file(const std::filesystem::path& path, const std::string& contents);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(const std::vector<std::string>& cells);
  const std::string& str() const { return body_; }

 private:
  std::size_t columns_;
  std::string body_;
};

std::string csv_cell(double v);
std::string csv_cell(std::int64_t v);
std::string csv_cell(const std::string& v);

// Ordered list of written artifacts with content hashes; serialized as the
// run manifest.
class Manifest {
 public:
  void record(const std::filesystem::path& out_dir, const std::string& name,
              const std::string& contents);
  std::string to_json() const;
  void write(const std::filesystem::path& out_dir) const;

 private:
  struct Entry {
    std::string name;
    std::uint64_t bytes;
    std::string sha256;
  };
  std::vector<Entry> entries_;
};

}  // namespace dynloc
