#include "aesop/losses.hpp"

#include <fmt/format.h>

#include "aesop/errors.hpp"
#include "aesop/ops.hpp"

namespace aesop {

namespace {

constexpr int kArtifactWindow = 7;
constexpr double kArtifactExponent = 0.2;

template <class T>
T field(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

std::string_view to_string(ObjectiveMode mode) { return mode == ObjectiveMode::kAesop ? "aesop" : "baseline"; }

ObjectiveMode objective_mode_from_string(std::string_view text) {
  if (text == "aesop") return ObjectiveMode::kAesop;
  if (text == "baseline") return ObjectiveMode::kBaseline;
  throw ConfigError(fmt::format("unknown objective mode '{}' (expected aesop or baseline)", text));
}

void LossConfig::validate() const {
  if (p != 1 && p != 2) throw ConfigError(fmt::format("loss norm p must be 1 or 2, got {}", p));
  for (double l : {lambda_aesop, lambda_pix, lambda_percep, lambda_adv, lambda_artif}) {
    if (!(l >= 0.0)) throw ConfigError("loss coefficients must be non-negative");
  }
}

nlohmann::json LossConfig::to_json() const {
  return {{"mode", std::string(to_string(mode))},
          {"lambda_aesop", lambda_aesop},
          {"lambda_pix", lambda_pix},
          {"lambda_percep", lambda_percep},
          {"lambda_adv", lambda_adv},
          {"lambda_artif", lambda_artif},
          {"p", p}};
}

LossConfig LossConfig::from_json(const nlohmann::json& j) {
  LossConfig c;
  if (j.contains("mode")) c.mode = objective_mode_from_string(j.at("mode").get<std::string>());
  c.lambda_aesop = field(j, "lambda_aesop", c.lambda_aesop);
  c.lambda_pix = field(j, "lambda_pix", c.lambda_pix);
  c.lambda_percep = field(j, "lambda_percep", c.lambda_percep);
  c.lambda_adv = field(j, "lambda_adv", c.lambda_adv);
  c.lambda_artif = field(j, "lambda_artif", c.lambda_artif);
  c.p = field(j, "p", c.p);
  return c;
}

double LossBreakdown::weighted_total(const LossConfig& cfg) const {
  const double fidelity =
      cfg.mode == ObjectiveMode::kAesop ? cfg.lambda_aesop * aesop : cfg.lambda_pix * pix;
  return fidelity + cfg.lambda_percep * percep + cfg.lambda_adv * adv_g + cfg.lambda_artif * artif;
}

ag::Var loss_pix(const ag::Var& sr, const ag::Var& hr, int p) {
  require_same_shape(sr.value(), hr.value(), "loss_pix");
  return ag::mean_lp(sr, hr, p);
}

ag::Var loss_aesop(const ag::Var& sr, const ag::Var& hr, FidelityBiasEstimator& ae, int p) {
  if (!ae.frozen()) throw FreezeViolation("the autoencoder must be frozen before it supervises SR training");
  require_same_shape(sr.value(), hr.value(), "loss_aesop");
  const int s = ae.scale();
  if (sr.value().dim(-1) % s != 0 || sr.value().dim(-2) % s != 0) {
    throw DimensionError(fmt::format("loss_aesop input {} not divisible by scale {}", to_string(sr.shape()), s));
  }
  ag::Var target;
  {
    ag::NoGradGuard guard;
    target = ae.reconstruct(hr.detach());
  }
  return ag::mean_lp(ae.reconstruct(sr), target, p);
}

ag::Var loss_perceptual(const ag::Var& sr, const ag::Var& hr, const ConvFeatureExtractor& extractor) {
  if (!extractor.state().frozen()) throw FreezeViolation("the perceptual extractor must be frozen");
  require_same_shape(sr.value(), hr.value(), "loss_perceptual");
  const auto fs = extractor.features(sr);
  const auto fh = extractor.features(hr);
  std::vector<std::pair<double, ag::Var>> terms;
  for (std::size_t i = 0; i < fs.size(); ++i) terms.emplace_back(1.0, ag::mean_lp(fs[i], fh[i], 1));
  return ag::weighted_sum(terms);
}

AdversarialLoss relativistic_loss(const ag::Var& real_logits, const ag::Var& fake_logits) {
  const ag::Var real_mean = ag::mean(real_logits);
  const ag::Var fake_mean = ag::mean(fake_logits);
  const ag::Var real_rel = ag::sub_broadcast(real_logits, fake_mean);
  const ag::Var fake_rel = ag::sub_broadcast(fake_logits, real_mean);
  AdversarialLoss out;
  out.g = ag::add(ag::mean(ag::softplus(real_rel)), ag::mean(ag::softplus(ag::scale(fake_rel, -1.0))));
  out.d = ag::add(ag::mean(ag::softplus(ag::scale(real_rel, -1.0))), ag::mean(ag::softplus(fake_rel)));
  return out;
}

AdversarialLoss loss_adversarial(const ag::Var& sr, const ag::Var& hr, Discriminator& disc, bool for_generator) {
  require_same_shape(sr.value(), hr.value(), "loss_adversarial");
  if (for_generator) {
    if (!disc.state().frozen()) {
      throw FreezeViolation("the discriminator must be frozen while the generator objective is evaluated");
    }
    const ag::Var real = disc.forward(hr.detach());
    return relativistic_loss(real, disc.forward(sr));
  }
  return relativistic_loss(disc.forward(hr.detach()), disc.forward(sr.detach()));
}

ag::Var loss_artifact(const ag::Var& sr, const ag::Var& hr) {
  require_same_shape(sr.value(), hr.value(), "loss_artifact");
  if (sr.value().rank() != 4) throw DimensionError("loss_artifact expects [N,C,H,W]");
  const ag::Var abs_diff = ag::abs(ag::sub(sr, hr));
  const ag::Var residual = ag::channel_sum(abs_diff);
  const ag::Var patch_weight = ag::pow(ag::sample_variance(residual), kArtifactExponent);
  const ag::Var pixel_weight = ag::local_variance(residual, kArtifactWindow);
  const ag::Var weight = ag::scale_per_sample(pixel_weight, patch_weight);
  const int c = sr.value().dim(1);
  std::vector<ag::Var> copies(static_cast<std::size_t>(c), weight);
  return ag::mean(ag::mul(ag::concat_channels(copies), abs_diff));
}

GeneratorObjective total_loss(const LossConfig& cfg, const LossInputs& in) {
  cfg.validate();
  if (!in.sr.defined() || !in.hr.defined()) throw ConfigError("total_loss needs both sr and hr");
  GeneratorObjective out;
  LossBreakdown& b = out.breakdown;
  std::vector<std::pair<double, ag::Var>> terms;

  if (cfg.mode == ObjectiveMode::kAesop) {
    if (cfg.lambda_aesop != 0.0) {
      if (!in.ae) throw ConfigError("aesop mode requires a frozen autoencoder");
      const ag::Var t = loss_aesop(in.sr, in.hr, *in.ae, cfg.p);
      b.aesop = t.item();
      terms.emplace_back(cfg.lambda_aesop, t);
    }
  } else if (cfg.lambda_pix != 0.0) {
    const ag::Var t = loss_pix(in.sr, in.hr, cfg.p);
    b.pix = t.item();
    terms.emplace_back(cfg.lambda_pix, t);
  }
  if (cfg.lambda_percep != 0.0) {
    if (!in.extractor) throw ConfigError("perceptual term requires a feature extractor");
    const ag::Var t = loss_perceptual(in.sr, in.hr, *in.extractor);
    b.percep = t.item();
    terms.emplace_back(cfg.lambda_percep, t);
  }
  if (cfg.lambda_adv != 0.0) {
    if (!in.disc) throw ConfigError("adversarial term requires a discriminator");
    const ag::Var t = loss_adversarial(in.sr, in.hr, *in.disc, true).g;
    b.adv_g = t.item();
    terms.emplace_back(cfg.lambda_adv, t);
  }
  if (cfg.lambda_artif != 0.0) {
    const ag::Var t = loss_artifact(in.sr, in.hr);
    b.artif = t.item();
    terms.emplace_back(cfg.lambda_artif, t);
  }
  if (terms.empty()) {
    out.total = ag::Var(Tensor({1}, 0.0));
  } else {
    out.total = ag::weighted_sum(terms);
  }
  b.total = out.total.item();
  return out;
}

}  // namespace aesop
