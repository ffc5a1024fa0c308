#include "aesop/optim.hpp"

#include <cmath>

#include <fmt/format.h>

#include "aesop/errors.hpp"

namespace aesop {

Adam::Adam(ModelState& model, AdamConfig cfg) : model_(&model), cfg_(cfg) {
  for (const auto& [_, p] : model.parameters()) {
    m_.emplace_back(p.shape());
    v_.emplace_back(p.shape());
  }
}

void Adam::step() {
  if (model_->frozen()) throw FreezeViolation(fmt::format("optimizer step on frozen {}", model_->kind()));
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  const auto& params = model_->parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    ag::Var p = params[i].second;
    if (!p.has_grad()) continue;
    const Tensor g = p.grad();
    double* w = p.mutable_value().data();
    double* m = m_[i].data();
    double* v = v_[i].data();
    for (std::size_t k = 0; k < g.size(); ++k) {
      m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g[k];
      v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g[k] * g[k];
      const double mh = m[k] / c1;
      const double vh = v[k] / c2;
      w[k] -= cfg_.lr * mh / (std::sqrt(vh) + cfg_.eps);
    }
  }
}

CheckpointSection Adam::to_section(const std::string& section_name) const {
  CheckpointSection s;
  s.name = section_name;
  s.meta = {{"t", t_},
            {"lr", cfg_.lr},
            {"beta1", cfg_.beta1},
            {"beta2", cfg_.beta2},
            {"eps", cfg_.eps},
            {"model_fingerprint", model_->fingerprint()}};
  const auto& params = model_->parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.arrays.push_back({"m/" + params[i].first, m_[i]});
    s.arrays.push_back({"v/" + params[i].first, v_[i]});
  }
  return s;
}

void Adam::load_section(const CheckpointSection& section) {
  if (section.meta.value("model_fingerprint", "") != model_->fingerprint()) {
    throw FingerprintError("optimizer state belongs to a different model configuration");
  }
  const auto& params = model_->parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& m = section.array("m/" + params[i].first);
    const Tensor& v = section.array("v/" + params[i].first);
    require_same_shape(m_[i], m, "optimizer moment");
    require_same_shape(v_[i], v, "optimizer moment");
    m_[i] = m;
    v_[i] = v;
  }
  t_ = section.meta.at("t").get<std::int64_t>();
}

}  // namespace aesop
