#include "aesop/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "aesop/errors.hpp"
#include "aesop/hash.hpp"
#include "aesop/image_io.hpp"

namespace aesop {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifest = "manifest.jsonl";
constexpr const char* kInfo = "dataset.json";

json entry_to_json(const ManifestEntry& e) {
  return {{"id", e.id},
          {"hr", e.hr_path},
          {"lr", e.lr_path},
          {"hr_height", e.hr_height},
          {"hr_width", e.hr_width},
          {"hr_fnv1a", e.hr_checksum},
          {"lr_fnv1a", e.lr_checksum},
          {"split", std::string(to_string(e.split))},
          {"cropped", e.cropped}};
}

ManifestEntry entry_from_json(const json& j) {
  ManifestEntry e;
  e.id = j.at("id").get<std::string>();
  e.hr_path = j.at("hr").get<std::string>();
  e.lr_path = j.at("lr").get<std::string>();
  e.hr_height = j.at("hr_height").get<int>();
  e.hr_width = j.at("hr_width").get<int>();
  e.hr_checksum = j.at("hr_fnv1a").get<std::string>();
  e.lr_checksum = j.at("lr_fnv1a").get<std::string>();
  e.split = j.at("split").get<std::string>() == "val" ? Split::kValidation : Split::kTrain;
  e.cropped = j.value("cropped", false);
  return e;
}

ImageTensor degrade(const ImageTensor& hr, const ResampleSpec& spec) {
  return quantize8(bicubic_downsample(hr, spec));
}

}  // namespace

std::string_view to_string(Split split) { return split == Split::kTrain ? "train" : "val"; }

struct PairedDataset::Cache {
  std::mutex mutex;
  std::map<std::string, ImageTensor> images;

  const ImageTensor& get(const fs::path& path) {
    std::lock_guard lock(mutex);
    auto it = images.find(path.string());
    if (it == images.end()) it = images.emplace(path.string(), read_png(path)).first;
    return it->second;
  }
};

PairedDataset PairedDataset::open(const fs::path& root) {
  PairedDataset ds;
  ds.root_ = root;
  ds.cache_ = std::make_shared<Cache>();
  std::ifstream info_in(root / kInfo);
  if (!info_in) throw IoError(fmt::format("{} is not a prepared dataset (missing {})", root.string(), kInfo));
  std::ifstream manifest_in(root / kManifest);
  if (!manifest_in) throw IoError(fmt::format("{} has no {}", root.string(), kManifest));
  try {
    const json info = json::parse(info_in);
    ds.spec_.scale = info.at("scale").get<int>();
    ds.spec_.kernel_a = info.at("kernel_a").get<double>();
    ds.spec_.antialias = info.at("antialias").get<bool>();
    std::string line;
    while (std::getline(manifest_in, line)) {
      if (!line.empty()) ds.entries_.push_back(entry_from_json(json::parse(line)));
    }
  } catch (const json::exception& e) {
    throw IoError(fmt::format("malformed dataset metadata in {}: {}", root.string(), e.what()));
  }
  return ds;
}

PairedDataset PairedDataset::subset(Split split) const {
  PairedDataset out;
  out.root_ = root_;
  out.spec_ = spec_;
  out.cache_ = cache_;
  for (const auto& e : entries_) {
    if (e.split == split) out.entries_.push_back(e);
  }
  return out;
}

const ImageTensor& PairedDataset::hr(std::size_t index) const {
  return cache_->get(root_ / entries_.at(index).hr_path);
}

const ImageTensor& PairedDataset::lr(std::size_t index) const {
  return cache_->get(root_ / entries_.at(index).lr_path);
}

PairedDataset prepare_dataset(const fs::path& source, const fs::path& root, const PrepareOptions& options,
                              PrepareReport* report) {
  PrepareReport local;
  PrepareReport& rep = report ? *report : local;
  const ResampleSpec& spec = options.spec;
  if (spec.scale < 1) throw ConfigError("scale must be positive");
  if (options.val_period < 1) throw ConfigError("val_period must be positive");

  if (fs::exists(root / kManifest)) {
    PairedDataset ds = PairedDataset::open(root);
    if (ds.scale() != spec.scale || ds.resample_spec().kernel_a != spec.kernel_a ||
        ds.resample_spec().antialias != spec.antialias) {
      throw ConfigError(fmt::format("dataset at {} was prepared with scale {}, requested {}", root.string(),
                                    ds.scale(), spec.scale));
    }
    const AuditReport audit = audit_dataset(ds);
    if (!audit.ok()) throw AuditError(fmt::format("dataset audit failed: {}", audit.failures.front()));
    rep.verified = audit.checked;
    return ds;
  }

  if (!fs::is_directory(source)) throw IoError("source folder does not exist: " + source.string());
  std::vector<fs::path> files;
  for (const auto& de : fs::directory_iterator(source)) {
    if (de.is_regular_file() && is_image_file(de.path())) files.push_back(de.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no PNG images in " + source.string());

  const std::string lr_dir = fmt::format("lr_x{}", spec.scale);
  fs::create_directories(root / "hr");
  fs::create_directories(root / lr_dir);
  std::ofstream manifest(root / (std::string(kManifest) + ".tmp"));
  for (std::size_t i = 0; i < files.size(); ++i) {
    const ImageTensor src = read_png(files[i]);
    const ImageTensor hr = center_crop_divisible(src, spec.scale);
    ManifestEntry e;
    e.id = files[i].stem().string();
    e.hr_path = "hr/" + e.id + ".png";
    e.lr_path = lr_dir + "/" + e.id + ".png";
    e.hr_height = hr.height();
    e.hr_width = hr.width();
    e.cropped = hr.height() != src.height() || hr.width() != src.width();
    e.split = (i + 1) % options.val_period == 0 ? Split::kValidation : Split::kTrain;
    if (e.cropped) rep.cropped.push_back(e.id);
    write_png(root / e.hr_path, hr);
    write_png(root / e.lr_path, degrade(hr, spec));
    ++rep.written;
    e.hr_checksum = file_checksum(root / e.hr_path);
    e.lr_checksum = file_checksum(root / e.lr_path);
    manifest << entry_to_json(e).dump() << '\n';
  }
  manifest.close();
  {
    std::ofstream info(root / kInfo);
    info << json{{"scale", spec.scale},
                 {"kernel", "bicubic"},
                 {"kernel_a", spec.kernel_a},
                 {"antialias", spec.antialias},
                 {"val_period", options.val_period}}
                .dump(2)
         << '\n';
  }
  fs::rename(root / (std::string(kManifest) + ".tmp"), root / kManifest);
  return PairedDataset::open(root);
}

AuditReport audit_dataset(const PairedDataset& dataset) {
  AuditReport rep;
  for (const auto& e : dataset.entries()) {
    ++rep.checked;
    const fs::path hr_path = dataset.root() / e.hr_path;
    const fs::path lr_path = dataset.root() / e.lr_path;
    if (!fs::exists(hr_path) || !fs::exists(lr_path)) {
      rep.failures.push_back(fmt::format("{}: missing file", e.id));
      continue;
    }
    if (file_checksum(hr_path) != e.hr_checksum) {
      rep.failures.push_back(fmt::format("{}: checksum mismatch for {}", e.id, e.hr_path));
      continue;
    }
    if (file_checksum(lr_path) != e.lr_checksum) {
      rep.failures.push_back(fmt::format("{}: checksum mismatch for {}", e.id, e.lr_path));
      continue;
    }
    const ImageTensor hr = read_png(hr_path);
    if (hr.height() % dataset.scale() != 0 || hr.width() % dataset.scale() != 0) {
      rep.failures.push_back(fmt::format("{}: HR dims not divisible by {}", e.id, dataset.scale()));
      continue;
    }
    if (to_bytes8(degrade(hr, dataset.resample_spec())) != to_bytes8(read_png(lr_path))) {
      rep.failures.push_back(fmt::format("{}: {} differs from the degraded HR image", e.id, e.lr_path));
    }
  }
  return rep;
}

ImageTensor apply_dihedral(const ImageTensor& img, int k) {
  if (k < 0 || k > 7) throw DomainError(fmt::format("dihedral index must be in [0,8), got {}", k));
  const ImageTensor b = img.as_batch();
  const int n = b.batch(), c = b.channels(), h = b.height(), w = b.width();
  const bool flip = k >= 4;
  const int turns = k % 4;
  const bool swap = turns % 2 == 1;
  const int oh = swap ? w : h;
  const int ow = swap ? h : w;
  Tensor out({n, c, oh, ow});
  const Tensor& src = b.tensor();
  for (int i = 0; i < n; ++i)
    for (int ch = 0; ch < c; ++ch)
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
          // Inverse map: output (y, x) reads source (sy, sx) of the flipped image.
          int sy, sx;
          switch (turns) {
            case 0: sy = y; sx = x; break;
            case 1: sy = x; sx = w - 1 - y; break;
            case 2: sy = h - 1 - y; sx = w - 1 - x; break;
            default: sy = h - 1 - x; sx = y; break;
          }
          if (flip) sx = w - 1 - sx;
          out.at(i, ch, y, x) = src.at(i, ch, sy, sx);
        }
  ImageTensor res(std::move(out), img.color_space());
  return img.batched() ? res : res.item(0);
}

PatchSampler::PatchSampler(const PairedDataset& dataset, int hr_patch, int batch, bool augment, std::uint64_t seed)
    : dataset_(&dataset), hr_patch_(hr_patch), batch_(batch), augment_(augment), rng_(seed) {
  const int s = dataset.scale();
  if (hr_patch <= 0 || hr_patch % s != 0) {
    throw DimensionError(fmt::format("HR patch {} must be a positive multiple of the scale {}", hr_patch, s));
  }
  if (batch <= 0) throw ConfigError("batch size must be positive");
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& e = dataset.entries()[i];
    if (e.hr_height >= hr_patch && e.hr_width >= hr_patch) eligible_.push_back(i);
  }
  if (eligible_.empty()) {
    throw DimensionError(fmt::format("no image in {} is at least {}x{}", dataset.root().string(), hr_patch, hr_patch));
  }
}

PatchBatch PatchSampler::next() {
  const int s = dataset_->scale();
  const int lp = hr_patch_ / s;
  PatchBatch out;
  std::vector<ImageTensor> hrs, lrs;
  for (int b = 0; b < batch_; ++b) {
    const std::size_t idx = eligible_[std::uniform_int_distribution<std::size_t>(0, eligible_.size() - 1)(rng_)];
    const auto& e = dataset_->entries()[idx];
    const int ty = std::uniform_int_distribution<int>(0, (e.hr_height - hr_patch_) / s)(rng_);
    const int tx = std::uniform_int_distribution<int>(0, (e.hr_width - hr_patch_) / s)(rng_);
    const int k = augment_ ? std::uniform_int_distribution<int>(0, 7)(rng_) : 0;
    hrs.push_back(apply_dihedral(crop(dataset_->hr(idx), ty * s, tx * s, hr_patch_, hr_patch_), k));
    lrs.push_back(apply_dihedral(crop(dataset_->lr(idx), ty, tx, lp, lp), k));
    out.image_index.push_back(idx);
    out.hr_top.push_back(ty * s);
    out.hr_left.push_back(tx * s);
    out.transform.push_back(k);
  }
  out.hr = stack(hrs);
  out.lr = stack(lrs);
  return out;
}

std::string PatchSampler::rng_state() const {
  std::ostringstream os;
  os << rng_;
  return os.str();
}

void PatchSampler::set_rng_state(const std::string& state) {
  std::istringstream is(state);
  is >> rng_;
  if (!is) throw IoError("malformed sampler state");
}

}  // namespace aesop
