#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aesop/tensor.hpp"

namespace aesop {

struct NamedArray {
  std::string name;
  Tensor tensor;
};

/// One logical block of a checkpoint file (a model, an optimizer, ...).
struct CheckpointSection {
  std::string name;
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedArray> arrays;

  const Tensor& array(const std::string& array_name) const;
};

/// Checkpoint container.
///
/// Layout: the 8-byte magic "AESOPCK1", a little-endian uint64 header length,
/// a JSON header, then the raw array payload. The header lists every section
/// with its metadata and, per array, name, shape, dtype ("f64le"), byte
/// offset into the payload and byte count. A FNV-1a digest of the payload is
/// stored in the header and checked on load.
class Checkpoint {
 public:
  std::vector<CheckpointSection> sections;
  nlohmann::json meta = nlohmann::json::object();

  const CheckpointSection& section(const std::string& name) const;
  bool has_section(const std::string& name) const;

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

}  // namespace aesop
