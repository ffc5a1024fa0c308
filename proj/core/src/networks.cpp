#include "aesop/networks.hpp"

#include <cmath>

#include <fmt/format.h>

#include "aesop/checkpoint.hpp"
#include "aesop/errors.hpp"
#include "aesop/ops.hpp"

namespace aesop {

namespace {

constexpr double kSlope = 0.2;
constexpr double kResidualScale = 0.2;
// Common framework default for convs: std 1/sqrt(3 fan_in), i.e. Kaiming
// normal scaled by 1/sqrt(6). Dense-block convs use Kaiming x 0.1 instead.
const double kDefaultInitScale = 1.0 / std::sqrt(6.0);

Tensor kaiming_normal(const Shape& shape, Rng& rng, double init_scale) {
  const int fan_in = shape[1] * shape[2] * shape[3];
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in) * init_scale);
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

// Factorization of the scale into x2 stages plus one remainder stage.
std::vector<int> upsample_factors(int scale) {
  std::vector<int> f;
  while (scale % 2 == 0) {
    f.push_back(2);
    scale /= 2;
  }
  if (scale > 1) f.push_back(scale);
  return f;
}

void require_positive(int v, const char* what) {
  if (v <= 0) throw ConfigError(fmt::format("{} must be positive, got {}", what, v));
}

template <class T>
T field(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

void GeneratorConfig::validate() const {
  require_positive(num_rrdb_blocks, "num_rrdb_blocks");
  require_positive(base_channels, "base_channels");
  require_positive(growth_channels, "growth_channels");
  if (scale < 1) throw ConfigError(fmt::format("scale must be >= 1, got {}", scale));
}

nlohmann::json GeneratorConfig::to_json() const {
  return {{"num_rrdb_blocks", num_rrdb_blocks},
          {"base_channels", base_channels},
          {"growth_channels", growth_channels},
          {"scale", scale}};
}

GeneratorConfig GeneratorConfig::from_json(const nlohmann::json& j) {
  GeneratorConfig c;
  c.num_rrdb_blocks = field(j, "num_rrdb_blocks", c.num_rrdb_blocks);
  c.base_channels = field(j, "base_channels", c.base_channels);
  c.growth_channels = field(j, "growth_channels", c.growth_channels);
  c.scale = field(j, "scale", c.scale);
  return c;
}

void EncoderConfig::validate() const {
  if (scale < 2) throw ConfigError(fmt::format("encoder scale must be >= 2, got {}", scale));
  require_positive(rrdb_channels, "rrdb_channels");
  if (rrdb_channels % (scale * scale) != 0 || rrdb_channels < 2) {
    throw ConfigError(
        fmt::format("encoder rrdb_channels ({}) must be a multiple of scale^2 ({})", rrdb_channels, scale * scale));
  }
}

nlohmann::json EncoderConfig::to_json() const {
  return {{"scale", scale},
          {"rrdb_channels", rrdb_channels},
          {"num_rrdb_blocks", kNumRrdbBlocks},
          {"from_rgb_layers", kFromRgbLayers},
          {"to_rgb_layers", kToRgbLayers},
          {"kernel_size", kKernelSize}};
}

EncoderConfig EncoderConfig::from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.scale = field(j, "scale", c.scale);
  c.rrdb_channels = field(j, "rrdb_channels", c.rrdb_channels);
  return c;
}

void DiscriminatorConfig::validate() const {
  require_positive(base_channels, "discriminator base_channels");
  require_positive(num_downsamples, "discriminator num_downsamples");
}

nlohmann::json DiscriminatorConfig::to_json() const {
  return {{"base_channels", base_channels}, {"num_downsamples", num_downsamples}};
}

DiscriminatorConfig DiscriminatorConfig::from_json(const nlohmann::json& j) {
  DiscriminatorConfig c;
  c.base_channels = field(j, "base_channels", c.base_channels);
  c.num_downsamples = field(j, "num_downsamples", c.num_downsamples);
  return c;
}

void ExtractorConfig::validate() const {
  if (channels.empty() || channels.size() != strides.size()) {
    throw ConfigError("extractor channels and strides must be non-empty and equally long");
  }
  for (int c : channels) require_positive(c, "extractor channel count");
  for (int s : strides) require_positive(s, "extractor stride");
  if (feature_layers.empty()) throw ConfigError("extractor needs at least one feature layer");
  int prev = -1;
  for (int l : feature_layers) {
    if (l <= prev || l >= static_cast<int>(channels.size())) {
      throw ConfigError("extractor feature layers must be increasing indices into the conv stack");
    }
    prev = l;
  }
}

nlohmann::json ExtractorConfig::to_json() const {
  return {{"channels", channels}, {"strides", strides}, {"feature_layers", feature_layers}, {"seed", seed}};
}

ExtractorConfig ExtractorConfig::from_json(const nlohmann::json& j) {
  ExtractorConfig c;
  c.channels = field(j, "channels", c.channels);
  c.strides = field(j, "strides", c.strides);
  c.feature_layers = field(j, "feature_layers", c.feature_layers);
  c.seed = field(j, "seed", c.seed);
  return c;
}

Conv2d::Conv2d(ModelState& state, const std::string& name, int in_channels, int out_channels, int kernel, int stride,
               Rng& rng, double init_scale)
    : stride_(stride), padding_(kernel / 2) {
  weight_ = state.add_parameter(name + ".weight",
                                kaiming_normal({out_channels, in_channels, kernel, kernel}, rng, init_scale));
  bias_ = state.add_parameter(name + ".bias", Tensor({out_channels}));
}

ag::Var Conv2d::operator()(const ag::Var& x) const { return ag::conv2d(x, weight_, bias_, stride_, padding_); }

ResidualDenseBlock::ResidualDenseBlock(ModelState& state, const std::string& prefix, int channels, int growth,
                                       Rng& rng) {
  for (int i = 0; i < 5; ++i) {
    const int out = i == 4 ? channels : growth;
    convs_.emplace_back(state, fmt::format("{}.conv{}", prefix, i + 1), channels + i * growth, out, 3, 1, rng, 0.1);
  }
}

ag::Var ResidualDenseBlock::operator()(const ag::Var& x) const {
  std::vector<ag::Var> feats{x};
  for (int i = 0; i < 4; ++i) {
    const ag::Var in = feats.size() == 1 ? x : ag::concat_channels(feats);
    feats.push_back(ag::leaky_relu(convs_[i](in), kSlope));
  }
  const ag::Var out = convs_[4](ag::concat_channels(feats));
  return ag::add(ag::scale(out, kResidualScale), x);
}

Rrdb::Rrdb(ModelState& state, const std::string& prefix, int channels, int growth, Rng& rng) {
  for (int i = 0; i < 3; ++i) {
    blocks_.emplace_back(state, fmt::format("{}.rdb{}", prefix, i + 1), channels, growth, rng);
  }
}

ag::Var Rrdb::operator()(const ag::Var& x) const {
  ag::Var h = x;
  for (const auto& b : blocks_) h = b(h);
  return ag::add(ag::scale(h, kResidualScale), x);
}

Generator::Generator(const GeneratorConfig& cfg, std::uint64_t seed) : Network("generator", cfg.to_json()), cfg_(cfg) {
  cfg.validate();
  Rng rng(seed);
  const int nf = cfg.base_channels;
  conv_first_ = Conv2d(state_, "conv_first", 3, nf, 3, 1, rng, kDefaultInitScale);
  for (int i = 0; i < cfg.num_rrdb_blocks; ++i) {
    body_.emplace_back(state_, fmt::format("body.{}", i), nf, cfg.growth_channels, rng);
  }
  conv_body_ = Conv2d(state_, "conv_body", nf, nf, 3, 1, rng, kDefaultInitScale);
  int stage = 0;
  for (int f : upsample_factors(cfg.scale)) {
    up_stages_.emplace_back(f, Conv2d(state_, fmt::format("conv_up{}", ++stage), nf, nf, 3, 1, rng, kDefaultInitScale));
  }
  conv_hr_ = Conv2d(state_, "conv_hr", nf, nf, 3, 1, rng, kDefaultInitScale);
  conv_last_ = Conv2d(state_, "conv_last", nf, 3, 3, 1, rng, kDefaultInitScale);
}

ag::Var Generator::features(const ag::Var& x) const { return conv_first_(x); }

ag::Var Generator::trunk(const ag::Var& feat) const {
  ag::Var h = feat;
  for (const auto& b : body_) h = b(h);
  return ag::add(feat, conv_body_(h));
}

ag::Var Generator::upsample_head(const ag::Var& trunk_out) const {
  ag::Var h = trunk_out;
  for (const auto& [f, conv] : up_stages_) h = ag::leaky_relu(conv(ag::upsample_nearest(h, f)), kSlope);
  return conv_last_(ag::leaky_relu(conv_hr_(h), kSlope));
}

ag::Var Generator::forward(const ag::Var& x) {
  if (x.value().rank() != 4 || x.value().dim(1) != 3) {
    throw DimensionError(fmt::format("generator expects [N,3,h,w], got {}", to_string(x.shape())));
  }
  return upsample_head(trunk(features(x)));
}

void Generator::zero_trunk_blocks() {
  for (auto& [name, v] : state_.parameters()) {
    if (name.rfind("body.", 0) == 0) {
      ag::Var p = v;
      p.mutable_value().fill(0.0);
    }
  }
}

Encoder::Encoder(const EncoderConfig& cfg, std::uint64_t seed) : Network("encoder", cfg.to_json()), cfg_(cfg) {
  cfg.validate();
  Rng rng(seed);
  const int c = cfg.rrdb_channels;
  const int s2 = cfg.scale * cfg.scale;
  from_rgb1_ = Conv2d(state_, "from_rgb1", 3, c, 3, 1, rng, kDefaultInitScale);
  from_rgb2_ = Conv2d(state_, "from_rgb2", c, c / s2, 3, 1, rng, kDefaultInitScale);
  for (int i = 0; i < EncoderConfig::kNumRrdbBlocks; ++i) {
    blocks_.emplace_back(state_, fmt::format("body.{}", i), c, cfg.growth_channels(), rng);
  }
  to_rgb1_ = Conv2d(state_, "to_rgb1", c, c, 3, 1, rng, kDefaultInitScale);
  to_rgb2_ = Conv2d(state_, "to_rgb2", c, 3, 3, 1, rng, kDefaultInitScale);
}

ag::Var Encoder::forward(const ag::Var& x) {
  const Tensor& v = x.value();
  if (v.rank() != 4 || v.dim(1) != 3) {
    throw DimensionError(fmt::format("encoder expects [N,3,H,W], got {}", to_string(v.shape())));
  }
  if (v.dim(2) % cfg_.scale != 0 || v.dim(3) % cfg_.scale != 0) {
    throw DimensionError(
        fmt::format("encoder input {} is not divisible by scale {}", to_string(v.shape()), cfg_.scale));
  }
  ag::Var h = ag::leaky_relu(from_rgb1_(x), kSlope);
  h = ag::pixel_unshuffle(from_rgb2_(h), cfg_.scale);
  for (const auto& b : blocks_) h = b(h);
  return to_rgb2_(ag::leaky_relu(to_rgb1_(h), kSlope));
}

Discriminator::Discriminator(const DiscriminatorConfig& cfg, std::uint64_t seed)
    : Network("discriminator", cfg.to_json()), cfg_(cfg) {
  cfg.validate();
  Rng rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  auto add_layer = [&](int in, int out, int stride) {
    const std::string name = fmt::format("conv{}", layers_.size());
    Layer l{name, state_.add_parameter(name + ".weight", kaiming_normal({out, in, 3, 3}, rng, 1.0)),
            state_.add_parameter(name + ".bias", Tensor({out})), stride};
    Tensor u({out});
    double norm = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] = unit(rng);
      norm += u[i] * u[i];
    }
    for (std::size_t i = 0; i < u.size(); ++i) u[i] /= std::sqrt(norm);
    state_.add_buffer(name + ".u", std::move(u));
    layers_.push_back(std::move(l));
  };
  int ch = cfg.base_channels;
  add_layer(3, ch, 1);
  for (int d = 0; d < cfg.num_downsamples; ++d) {
    add_layer(ch, ch, 2);
    if (d + 1 < cfg.num_downsamples) {
      add_layer(ch, ch * 2, 1);
      ch *= 2;
    }
  }
  add_layer(ch, 1, 1);
}

Shape Discriminator::output_shape(const Shape& input) const {
  if (input.size() != 4 || input[1] != 3) {
    throw DimensionError(fmt::format("discriminator expects [N,3,P,P], got {}", to_string(input)));
  }
  const int m = cfg_.min_patch();
  if (input[2] < m || input[3] < m || input[2] % m != 0 || input[3] % m != 0) {
    throw DimensionError(fmt::format("discriminator patch {}x{} must be a multiple of {}", input[2], input[3], m));
  }
  return {input[0], 1, input[2] / m, input[3] / m};
}

ag::Var Discriminator::forward(const ag::Var& x) {
  output_shape(x.shape());
  ag::Var h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Layer& l = layers_[i];
    const ag::Var w = ag::spectral_normalize(l.weight, state_.buffer(l.name + ".u"), update_u_);
    h = ag::conv2d(h, w, l.bias, l.stride, 1);
    if (i + 1 < layers_.size()) h = ag::leaky_relu(h, kSlope);
  }
  return h;
}

ConvFeatureExtractor::ConvFeatureExtractor(const ExtractorConfig& cfg)
    : Network("extractor", cfg.to_json()), cfg_(cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  int in = 3;
  for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
    convs_.emplace_back(state_, fmt::format("conv{}", i), in, cfg.channels[i], 3, cfg.strides[i], rng);
    in = cfg.channels[i];
  }
  state_.set_frozen(true);
}

std::vector<ag::Var> ConvFeatureExtractor::features(const ag::Var& x) const {
  std::vector<ag::Var> out;
  ag::Var h = x;
  std::size_t next = 0;
  for (std::size_t i = 0; i < convs_.size() && next < cfg_.feature_layers.size(); ++i) {
    h = ag::relu(convs_[i](h));
    if (static_cast<int>(i) == cfg_.feature_layers[next]) {
      out.push_back(h);
      ++next;
    }
  }
  return out;
}

ag::Var ConvFeatureExtractor::forward(const ag::Var& x) { return features(x).back(); }

ImageTensor run_network(Network& net, const ImageTensor& img) {
  ag::NoGradGuard guard;
  ImageTensor out(net.forward(ag::Var(img.as_batch().tensor())).value(), ColorSpace::kRGB);
  return img.batched() ? out : out.item(0);
}

void save_checkpoint(const ModelState& state, const std::filesystem::path& path) {
  Checkpoint ck;
  ck.meta = {{"kind", state.kind()}};
  ck.sections.push_back(state.to_section("model"));
  ck.save(path);
}

void load_checkpoint(ModelState& state, const std::filesystem::path& path) {
  state.load_section(Checkpoint::load(path).section("model"));
}

std::unique_ptr<Generator> build_generator(const GeneratorConfig& cfg, GeneratorInit init, std::uint64_t seed,
                                           const std::optional<std::filesystem::path>& checkpoint) {
  auto g = std::make_unique<Generator>(cfg, seed);
  if (init == GeneratorInit::kPretrainedCheckpoint) {
    if (!checkpoint) throw ConfigError("pretrained generator init requires a checkpoint path");
    load_checkpoint(g->state(), *checkpoint);
    g->state().set_frozen(false);
    g->state().set_training_step(0);
  }
  return g;
}

std::unique_ptr<Generator> load_generator(const std::filesystem::path& checkpoint) {
  const Checkpoint ck = Checkpoint::load(checkpoint);
  const CheckpointSection& model = ck.section("model");
  if (model.meta.value("kind", "") != "generator") {
    throw FingerprintError(fmt::format("{} does not hold a generator", checkpoint.string()));
  }
  auto g = std::make_unique<Generator>(GeneratorConfig::from_json(model.meta.at("config")), 0);
  g->state().load_section(model);
  return g;
}

std::unique_ptr<Encoder> build_encoder(const EncoderConfig& cfg, std::uint64_t seed) {
  return std::make_unique<Encoder>(cfg, seed);
}

std::unique_ptr<Discriminator> build_discriminator(const DiscriminatorConfig& cfg, int patch, std::uint64_t seed) {
  auto d = std::make_unique<Discriminator>(cfg, seed);
  d->output_shape({1, 3, patch, patch});
  return d;
}

}  // namespace aesop
