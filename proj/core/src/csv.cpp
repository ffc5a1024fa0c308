#include "aesop/csv.hpp"

#include <sstream>

#include <fmt/format.h>

#include "aesop/errors.hpp"

namespace aesop {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string s;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) s += ',';
    s += fields[i];
  }
  return s;
}

}  // namespace

std::string format_number(double value) { return fmt::format("{}", value); }

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header, bool append)
    : path_(path), header_(std::move(header)) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const bool existing = append && std::filesystem::exists(path) && std::filesystem::file_size(path) > 0;
  if (existing) {
    const CsvTable t = read_csv(path);
    if (t.header != header_) throw IoError("CSV header mismatch when appending to " + path.string());
  }
  out_.open(path, existing ? std::ios::app : std::ios::trunc);
  if (!out_) throw IoError("cannot write " + path.string());
  if (!existing) out_ << join(header_) << '\n';
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != header_.size()) {
    throw DimensionError(fmt::format("CSV row has {} fields, header has {}", fields.size(), header_.size()));
  }
  out_ << join(fields) << '\n';
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw IoError("CSV has no column " + name);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  CsvTable t;
  std::string line;
  if (std::getline(in, line)) t.header = split_line(line);
  while (std::getline(in, line)) {
    if (!line.empty()) t.rows.push_back(split_line(line));
  }
  return t;
}

void truncate_csv(const std::filesystem::path& path, std::int64_t max_key) {
  const CsvTable t = read_csv(path);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << join(t.header) << '\n';
    for (const auto& r : t.rows) {
      if (!r.empty() && std::stoll(r[0]) <= max_key) out << join(r) << '\n';
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace aesop
