#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "aesop/autoencoder.hpp"
#include "aesop/autograd.hpp"
#include "aesop/networks.hpp"

namespace aesop {

/// kBaseline: pixel + perceptual + adversarial + artifact.
/// kAesop: the pixel term is replaced by the distance between auto-encoded
/// SR and HR images.
enum class ObjectiveMode { kBaseline, kAesop };

std::string_view to_string(ObjectiveMode mode);
ObjectiveMode objective_mode_from_string(std::string_view text);

struct LossConfig {
  ObjectiveMode mode = ObjectiveMode::kAesop;
  double lambda_aesop = 1.0;
  double lambda_pix = 0.01;
  double lambda_percep = 1.0;
  double lambda_adv = 0.005;
  double lambda_artif = 1.0;
  int p = 1;

  void validate() const;
  nlohmann::json to_json() const;
  static LossConfig from_json(const nlohmann::json& j);
};

/// Unweighted term values of one generator step plus the weighted total.
/// Inactive terms are 0.
struct LossBreakdown {
  std::int64_t step = 0;
  double aesop = 0;
  double pix = 0;
  double percep = 0;
  double adv_g = 0;
  double adv_d = 0;
  double artif = 0;
  double total = 0;

  /// Recomputes the weighted generator total from the term values.
  double weighted_total(const LossConfig& cfg) const;
};

/// Mean |sr - hr| (p = 1) or mean (sr - hr)^2 (p = 2).
ag::Var loss_pix(const ag::Var& sr, const ag::Var& hr, int p);

/// Mean L_p distance between ae(sr) and ae(hr), measured after the decoder.
/// Throws FreezeViolation when the estimator is not frozen.
ag::Var loss_aesop(const ag::Var& sr, const ag::Var& hr, FidelityBiasEstimator& ae, int p);

/// Sum over the extractor's feature layers of the mean absolute feature
/// difference. Throws FreezeViolation when the extractor is not frozen.
ag::Var loss_perceptual(const ag::Var& sr, const ag::Var& hr, const ConvFeatureExtractor& extractor);

struct AdversarialLoss {
  ag::Var g;
  ag::Var d;
};

/// Relativistic average losses on discriminator logits.
///   g = mean softplus(C(hr) - mean C(sr)) + mean softplus(-(C(sr) - mean C(hr)))
///   d = mean softplus(-(C(hr) - mean C(sr))) + mean softplus(C(sr) - mean C(hr))
AdversarialLoss relativistic_loss(const ag::Var& real_logits, const ag::Var& fake_logits);

/// Runs the discriminator on both batches. With `for_generator` the real
/// logits are treated as constants and the discriminator must be frozen;
/// otherwise sr is detached.
AdversarialLoss loss_adversarial(const ag::Var& sr, const ag::Var& hr, Discriminator& disc, bool for_generator);

/// Artifact penalty on the residual r = sum_c |sr - hr|:
///   w = var(r)^(1/5) * localvar_7x7(r)     (unbiased, reflect padding)
///   loss = mean(w * |sr - hr|)
/// Differentiated through the weights as well. Zero when sr = hr.
ag::Var loss_artifact(const ag::Var& sr, const ag::Var& hr);

struct LossInputs {
  ag::Var sr;
  ag::Var hr;
  FidelityBiasEstimator* ae = nullptr;
  const ConvFeatureExtractor* extractor = nullptr;
  Discriminator* disc = nullptr;
};

struct GeneratorObjective {
  ag::Var total;
  LossBreakdown breakdown;
};

/// Assembles the generator objective of the configured mode. Terms with a
/// zero coefficient are not evaluated. Throws ConfigError when a required
/// auxiliary model is missing.
GeneratorObjective total_loss(const LossConfig& cfg, const LossInputs& in);

}  // namespace aesop
