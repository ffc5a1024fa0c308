#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace aesop {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

/// Comma-separated writer with a fixed header. Fields are written verbatim;
/// callers pass numbers through format_number.
class CsvWriter {
 public:
  /// With `append`, an existing file keeps its rows and its header must match.
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header, bool append = false);

  void row(const std::vector<std::string>& fields);
  void flush() { out_.flush(); }
  const std::vector<std::string>& header() const { return header_; }

 private:
  std::filesystem::path path_;
  std::vector<std::string> header_;
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Rewrites `path` keeping the header and the rows whose first column, read
/// as an integer, is <= max_key.
void truncate_csv(const std::filesystem::path& path, std::int64_t max_key);

}  // namespace aesop
