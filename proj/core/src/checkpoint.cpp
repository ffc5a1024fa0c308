#include "aesop/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "aesop/errors.hpp"
#include "aesop/hash.hpp"

namespace aesop {

static_assert(std::endian::native == std::endian::little, "checkpoint payload assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'A', 'E', 'S', 'O', 'P', 'C', 'K', '1'};

}  // namespace

const Tensor& CheckpointSection::array(const std::string& array_name) const {
  for (const auto& a : arrays) {
    if (a.name == array_name) return a.tensor;
  }
  throw IoError(fmt::format("checkpoint section '{}' has no array '{}'", name, array_name));
}

const CheckpointSection& Checkpoint::section(const std::string& name) const {
  for (const auto& s : sections) {
    if (s.name == name) return s;
  }
  throw IoError(fmt::format("checkpoint has no section '{}'", name));
}

bool Checkpoint::has_section(const std::string& name) const {
  for (const auto& s : sections) {
    if (s.name == name) return true;
  }
  return false;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  nlohmann::json header;
  header["format"] = "aesop-checkpoint";
  header["version"] = 1;
  header["meta"] = meta;
  header["sections"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  Fnv1a digest;
  for (const auto& s : sections) {
    nlohmann::json js;
    js["name"] = s.name;
    js["meta"] = s.meta;
    js["arrays"] = nlohmann::json::array();
    for (const auto& a : s.arrays) {
      const std::uint64_t nbytes = a.tensor.size() * sizeof(double);
      js["arrays"].push_back({{"name", a.name},
                              {"shape", a.tensor.shape()},
                              {"dtype", "f64le"},
                              {"offset", offset},
                              {"nbytes", nbytes}});
      digest.update(a.tensor.values());
      offset += nbytes;
    }
    header["sections"].push_back(std::move(js));
  }
  header["payload_bytes"] = offset;
  header["payload_fnv1a"] = to_hex(digest.digest());
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t len = text.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& s : sections)
      for (const auto& a : s.arrays) {
        out.write(reinterpret_cast<const char*>(a.tensor.data()),
                  static_cast<std::streamsize>(a.tensor.size() * sizeof(double)));
      }
    if (!out) throw IoError("short write on checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char magic[sizeof(kMagic)];
  std::uint64_t len = 0;
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("corrupt checkpoint (bad magic): " + path.string());
  }
  if (!in.read(reinterpret_cast<char*>(&len), sizeof(len)) || len > (1ull << 30)) {
    throw IoError("corrupt checkpoint (bad header length): " + path.string());
  }
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) {
    throw IoError("corrupt checkpoint (truncated header): " + path.string());
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(fmt::format("corrupt checkpoint header in {}: {}", path.string(), e.what()));
  }

  Checkpoint ck;
  Fnv1a digest;
  try {
    if (header.at("format") != "aesop-checkpoint") throw IoError("not an aesop checkpoint: " + path.string());
    ck.meta = header.value("meta", nlohmann::json::object());
    for (const auto& js : header.at("sections")) {
      CheckpointSection s;
      s.name = js.at("name").get<std::string>();
      s.meta = js.at("meta");
      for (const auto& ja : js.at("arrays")) {
        if (ja.at("dtype") != "f64le") throw IoError("unsupported dtype in " + path.string());
        Tensor t(ja.at("shape").get<Shape>());
        const auto nbytes = ja.at("nbytes").get<std::uint64_t>();
        if (nbytes != t.size() * sizeof(double)) throw IoError("array size mismatch in " + path.string());
        if (!in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(nbytes))) {
          throw IoError("corrupt checkpoint (truncated payload): " + path.string());
        }
        digest.update(t.values());
        s.arrays.push_back({ja.at("name").get<std::string>(), std::move(t)});
      }
      ck.sections.push_back(std::move(s));
    }
    if (header.at("payload_fnv1a").get<std::string>() != to_hex(digest.digest())) {
      throw IoError("corrupt checkpoint (payload checksum mismatch): " + path.string());
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(fmt::format("corrupt checkpoint header in {}: {}", path.string(), e.what()));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError("corrupt checkpoint (trailing bytes): " + path.string());
  }
  return ck;
}

}  // namespace aesop
