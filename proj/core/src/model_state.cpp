#include "aesop/model_state.hpp"

#include <fmt/format.h>

#include "aesop/errors.hpp"
#include "aesop/hash.hpp"

namespace aesop {

std::string config_fingerprint(const std::string& kind, const nlohmann::json& config) {
  return to_hex(fnv1a(kind + "|" + config.dump()));
}

ModelState::ModelState(std::string kind, nlohmann::json config)
    : kind_(std::move(kind)), config_(std::move(config)), fingerprint_(config_fingerprint(kind_, config_)) {}

ag::Var& ModelState::add_parameter(const std::string& name, Tensor init) {
  for (const auto& [n, _] : parameters_) {
    if (n == name) throw ConfigError("duplicate parameter name " + name);
  }
  parameters_.emplace_back(name, ag::Var(std::move(init), !frozen_));
  return parameters_.back().second;
}

Tensor& ModelState::add_buffer(const std::string& name, Tensor init) {
  buffers_.emplace_back(name, std::move(init));
  return buffers_.back().second;
}

ag::Var& ModelState::parameter(const std::string& name) {
  for (auto& [n, v] : parameters_) {
    if (n == name) return v;
  }
  throw ConfigError(fmt::format("{} has no parameter {}", kind_, name));
}

Tensor& ModelState::buffer(const std::string& name) {
  for (auto& [n, t] : buffers_) {
    if (n == name) return t;
  }
  throw ConfigError(fmt::format("{} has no buffer {}", kind_, name));
}

std::size_t ModelState::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [_, v] : parameters_) n += v.size();
  return n;
}

void ModelState::set_frozen(bool frozen) {
  frozen_ = frozen;
  for (auto& [_, v] : parameters_) {
    v.set_requires_grad(!frozen);
    if (frozen) v.zero_grad();
  }
}

void ModelState::zero_grad() {
  for (auto& [_, v] : parameters_) v.zero_grad();
}

std::uint64_t ModelState::checksum() const {
  Fnv1a h;
  for (const auto& [name, v] : parameters_) {
    h.update(name);
    h.update(v.value().values());
  }
  return h.digest();
}

CheckpointSection ModelState::to_section(const std::string& section_name) const {
  CheckpointSection s;
  s.name = section_name;
  s.meta = {{"kind", kind_},
            {"config", config_},
            {"fingerprint", fingerprint_},
            {"frozen", frozen_},
            {"training_step", training_step_}};
  for (const auto& [name, v] : parameters_) s.arrays.push_back({"param/" + name, v.value()});
  for (const auto& [name, t] : buffers_) s.arrays.push_back({"buffer/" + name, t});
  return s;
}

void ModelState::load_section(const CheckpointSection& section) {
  const std::string fp = section.meta.value("fingerprint", "");
  if (fp != fingerprint_) {
    throw FingerprintError(fmt::format("checkpoint section '{}' has fingerprint {} ({}), model expects {} ({})",
                                       section.name, fp, section.meta.value("config", nlohmann::json()).dump(),
                                       fingerprint_, config_.dump()));
  }
  for (auto& [name, v] : parameters_) {
    const Tensor& t = section.array("param/" + name);
    require_same_shape(v.value(), t, "checkpoint parameter");
    v.mutable_value() = t;
  }
  for (auto& [name, t] : buffers_) {
    const Tensor& src = section.array("buffer/" + name);
    require_same_shape(t, src, "checkpoint buffer");
    t = src;
  }
  set_frozen(section.meta.value("frozen", false));
  training_step_ = section.meta.value("training_step", std::int64_t{0});
}

void ModelState::copy_values_from(const ModelState& other) {
  if (other.fingerprint_ != fingerprint_) {
    throw FingerprintError(fmt::format("cannot copy {} weights into {}: fingerprint {} vs {}", other.kind_, kind_,
                                       other.fingerprint_, fingerprint_));
  }
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    parameters_[i].second.mutable_value() = other.parameters_[i].second.value();
  }
  for (std::size_t i = 0; i < buffers_.size(); ++i) buffers_[i].second = other.buffers_[i].second;
}

}  // namespace aesop
