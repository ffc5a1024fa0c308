#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "aesop/image.hpp"
#include "aesop/resample.hpp"

namespace aesop {

enum class Split { kTrain, kValidation };

std::string_view to_string(Split split);

/// One manifest.jsonl record. Paths are relative to the dataset root.
struct ManifestEntry {
  std::string id;
  std::string hr_path;
  std::string lr_path;
  int hr_height = 0;
  int hr_width = 0;
  std::string hr_checksum;
  std::string lr_checksum;
  Split split = Split::kTrain;
  /// Source was center-cropped to dims divisible by the scale.
  bool cropped = false;
};

/// Prepared HR/LR pairs on disk.
///
/// Layout: <root>/manifest.jsonl, <root>/hr/<id>.png, <root>/lr_x<s>/<id>.png.
/// Every LR file holds the 8-bit quantization of bicubic_downsample(HR).
class PairedDataset {
 public:
  static PairedDataset open(const std::filesystem::path& root);

  const std::filesystem::path& root() const { return root_; }
  int scale() const { return spec_.scale; }
  const ResampleSpec& resample_spec() const { return spec_; }
  const std::vector<ManifestEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// Entries of one split; images are shared with the parent cache.
  PairedDataset subset(Split split) const;

  const ImageTensor& hr(std::size_t index) const;
  const ImageTensor& lr(std::size_t index) const;

 private:
  std::filesystem::path root_;
  ResampleSpec spec_;
  std::vector<ManifestEntry> entries_;
  struct Cache;
  std::shared_ptr<Cache> cache_;
};

struct PrepareOptions {
  ResampleSpec spec;
  /// Every val_period-th image (1-based) goes to the validation split.
  int val_period = 10;
};

struct PrepareReport {
  /// Images whose HR and LR files were written by this call.
  std::size_t written = 0;
  std::size_t verified = 0;
  std::vector<std::string> cropped;
};

/// Converts a folder of PNG images into a PairedDataset at `root`. Re-running
/// on an existing dataset verifies it and writes nothing. Throws AuditError
/// when an existing LR file does not match its HR source.
PairedDataset prepare_dataset(const std::filesystem::path& source, const std::filesystem::path& root,
                              const PrepareOptions& options, PrepareReport* report = nullptr);

struct AuditReport {
  std::size_t checked = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

/// Recomputes every LR file from its HR file and compares bytes and checksums.
AuditReport audit_dataset(const PairedDataset& dataset);

/// Element k of the dihedral group of the square: k % 4 quarter turns
/// counter-clockwise, preceded by a horizontal flip when k >= 4.
ImageTensor apply_dihedral(const ImageTensor& img, int k);

struct PatchBatch {
  ImageTensor hr;
  /// Aligned crop of the stored LR files.
  ImageTensor lr;
  std::vector<std::size_t> image_index;
  std::vector<int> hr_top;
  std::vector<int> hr_left;
  std::vector<int> transform;
};

/// Deterministic random patch sampler.
///
/// HR offsets are multiples of the scale so the LR crop starts at exactly
/// offset / scale. Images smaller than the patch are skipped; construction
/// fails when no image is large enough.
class PatchSampler {
 public:
  PatchSampler(const PairedDataset& dataset, int hr_patch, int batch, bool augment, std::uint64_t seed);

  PatchBatch next();

  /// Serialized generator state, for resumable training.
  std::string rng_state() const;
  void set_rng_state(const std::string& state);

  int hr_patch() const { return hr_patch_; }
  int batch() const { return batch_; }

 private:
  const PairedDataset* dataset_;
  int hr_patch_;
  int batch_;
  bool augment_;
  std::vector<std::size_t> eligible_;
  std::mt19937_64 rng_;
};

}  // namespace aesop
