#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aesop/autograd.hpp"
#include "aesop/image.hpp"
#include "aesop/model_state.hpp"

namespace aesop {

struct GeneratorConfig {
  int num_rrdb_blocks = 4;
  int base_channels = 32;
  int growth_channels = 16;
  int scale = 4;

  void validate() const;
  nlohmann::json to_json() const;
  static GeneratorConfig from_json(const nlohmann::json& j);
};

/// Lightweight encoder: two 3x3 from-RGB convs, pixel-unshuffle, two RRDB
/// blocks, two 3x3 to-RGB convs. The second from-RGB conv emits
/// rrdb_channels / scale^2 channels so the unshuffled tensor carries exactly
/// rrdb_channels; rrdb_channels must therefore be divisible by scale^2.
struct EncoderConfig {
  int scale = 4;
  int rrdb_channels = 32;

  static constexpr int kNumRrdbBlocks = 2;
  static constexpr int kFromRgbLayers = 2;
  static constexpr int kToRgbLayers = 2;
  static constexpr int kKernelSize = 3;

  int growth_channels() const { return rrdb_channels / 2; }
  void validate() const;
  nlohmann::json to_json() const;
  static EncoderConfig from_json(const nlohmann::json& j);
};

/// Patch discriminator: 3x3 convs alternating stride 1 and 2, channel count
/// doubling after each downsampling stage, every conv spectrally normalized,
/// final 3x3 conv to one logit per site. Output is [N, 1, P/2^d, P/2^d].
struct DiscriminatorConfig {
  int base_channels = 32;
  int num_downsamples = 3;

  int min_patch() const { return 1 << num_downsamples; }
  void validate() const;
  nlohmann::json to_json() const;
  static DiscriminatorConfig from_json(const nlohmann::json& j);
};

/// Fixed random conv stack used as a perceptual feature extractor.
struct ExtractorConfig {
  std::vector<int> channels = {8, 8, 16, 16, 16};
  std::vector<int> strides = {1, 2, 1, 2, 1};
  std::vector<int> feature_layers = {1, 3, 4};
  std::uint64_t seed = 20240611;

  void validate() const;
  nlohmann::json to_json() const;
  static ExtractorConfig from_json(const nlohmann::json& j);
};

using Rng = std::mt19937_64;

/// 3x3 (or kxk) convolution with "same" padding registered in a ModelState.
class Conv2d {
 public:
  Conv2d() = default;
  /// Weights ~ N(0, 2 / fan_in) * init_scale, zero bias.
  Conv2d(ModelState& state, const std::string& name, int in_channels, int out_channels, int kernel, int stride,
         Rng& rng, double init_scale = 1.0);

  ag::Var operator()(const ag::Var& x) const;
  ag::Var& weight() { return weight_; }
  ag::Var& bias() { return bias_; }

 private:
  ag::Var weight_;
  ag::Var bias_;
  int stride_ = 1;
  int padding_ = 1;
};

/// Residual dense block: five convs with dense connections, output scaled
/// by 0.2 and added to the input.
class ResidualDenseBlock {
 public:
  ResidualDenseBlock() = default;
  ResidualDenseBlock(ModelState& state, const std::string& prefix, int channels, int growth, Rng& rng);
  ag::Var operator()(const ag::Var& x) const;

 private:
  std::vector<Conv2d> convs_;
};

/// Three residual dense blocks inside a 0.2-scaled residual connection.
class Rrdb {
 public:
  Rrdb() = default;
  Rrdb(ModelState& state, const std::string& prefix, int channels, int growth, Rng& rng);
  ag::Var operator()(const ag::Var& x) const;

 private:
  std::vector<ResidualDenseBlock> blocks_;
};

/// Common surface of every network: a ModelState and a forward map on
/// batched [N,C,H,W] tensors.
class Network {
 public:
  virtual ~Network() = default;
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  virtual ag::Var forward(const ag::Var& x) = 0;
  ModelState& state() { return state_; }
  const ModelState& state() const { return state_; }

 protected:
  Network(std::string kind, nlohmann::json config) : state_(std::move(kind), std::move(config)) {}
  ModelState state_;
};

/// RRDB super-resolution network; also serves as the autoencoder decoder.
/// [N,3,h,w] -> [N,3,s*h,s*w].
class Generator final : public Network {
 public:
  Generator(const GeneratorConfig& cfg, std::uint64_t seed);
  ag::Var forward(const ag::Var& x) override;
  const GeneratorConfig& config() const { return cfg_; }
  /// Sets every parameter inside the RRDB trunk to zero.
  void zero_trunk_blocks();

  /// Shallow feature map after conv_first, and the trunk sum before upsampling.
  ag::Var features(const ag::Var& x) const;
  ag::Var trunk(const ag::Var& feat) const;
  ag::Var upsample_head(const ag::Var& trunk_out) const;

 private:
  GeneratorConfig cfg_;
  Conv2d conv_first_;
  std::vector<Rrdb> body_;
  Conv2d conv_body_;
  std::vector<std::pair<int, Conv2d>> up_stages_;
  Conv2d conv_hr_;
  Conv2d conv_last_;
};

/// [N,3,s*h,s*w] -> [N,3,h,w].
class Encoder final : public Network {
 public:
  Encoder(const EncoderConfig& cfg, std::uint64_t seed);
  ag::Var forward(const ag::Var& x) override;
  const EncoderConfig& config() const { return cfg_; }

 private:
  EncoderConfig cfg_;
  Conv2d from_rgb1_;
  Conv2d from_rgb2_;
  std::vector<Rrdb> blocks_;
  Conv2d to_rgb1_;
  Conv2d to_rgb2_;
};

class Discriminator final : public Network {
 public:
  Discriminator(const DiscriminatorConfig& cfg, std::uint64_t seed);
  /// Throws DimensionError when the patch is smaller than min_patch() or not
  /// divisible by it.
  ag::Var forward(const ag::Var& x) override;
  const DiscriminatorConfig& config() const { return cfg_; }
  /// When on, each forward advances the spectral-norm power iteration.
  void set_power_iteration(bool on) { update_u_ = on; }
  Shape output_shape(const Shape& input) const;

 private:
  struct Layer {
    std::string name;
    ag::Var weight;
    ag::Var bias;
    int stride;
  };
  DiscriminatorConfig cfg_;
  std::vector<Layer> layers_;
  bool update_u_ = false;
};

/// Fixed-seed random conv stack with ReLU activations; frozen at build.
class ConvFeatureExtractor final : public Network {
 public:
  explicit ConvFeatureExtractor(const ExtractorConfig& cfg = {});
  /// Feature maps at the configured layers (post-ReLU).
  std::vector<ag::Var> features(const ag::Var& x) const;
  /// Last configured feature map.
  ag::Var forward(const ag::Var& x) override;
  const ExtractorConfig& config() const { return cfg_; }

 private:
  ExtractorConfig cfg_;
  std::vector<Conv2d> convs_;
};

/// Unrecorded forward of a network on an image or batch; the result is an
/// RGB image with the batch layout of the input.
ImageTensor run_network(Network& net, const ImageTensor& img);

/// Writes a single-model checkpoint (section "model").
void save_checkpoint(const ModelState& state, const std::filesystem::path& path);
/// Loads section "model" into `state`; fingerprint must match.
void load_checkpoint(ModelState& state, const std::filesystem::path& path);

enum class GeneratorInit { kRandom, kPretrainedCheckpoint };

std::unique_ptr<Generator> build_generator(const GeneratorConfig& cfg, GeneratorInit init, std::uint64_t seed,
                                           const std::optional<std::filesystem::path>& checkpoint = std::nullopt);
/// Generator rebuilt from the config stored in section "model" of any
/// generator or SR-run checkpoint.
std::unique_ptr<Generator> load_generator(const std::filesystem::path& checkpoint);
std::unique_ptr<Encoder> build_encoder(const EncoderConfig& cfg, std::uint64_t seed);
std::unique_ptr<Discriminator> build_discriminator(const DiscriminatorConfig& cfg, int patch, std::uint64_t seed);

}  // namespace aesop
