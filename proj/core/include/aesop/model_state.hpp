#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "aesop/autograd.hpp"
#include "aesop/checkpoint.hpp"

namespace aesop {

/// Named parameters and buffers of one network, with its freeze flag and
/// config fingerprint.
///
/// Parameters are autograd leaves; freezing turns off their gradient
/// recording so the network still passes gradients through to its input
/// while its own weights stay untouched.
class ModelState {
 public:
  ModelState() = default;
  ModelState(std::string kind, nlohmann::json config);

  ag::Var& add_parameter(const std::string& name, Tensor init);
  Tensor& add_buffer(const std::string& name, Tensor init);

  const std::vector<std::pair<std::string, ag::Var>>& parameters() const { return parameters_; }
  std::vector<std::pair<std::string, Tensor>>& buffers() { return buffers_; }
  const std::vector<std::pair<std::string, Tensor>>& buffers() const { return buffers_; }
  ag::Var& parameter(const std::string& name);
  Tensor& buffer(const std::string& name);

  /// Total number of scalar parameters.
  std::size_t parameter_count() const;

  bool frozen() const { return frozen_; }
  void set_frozen(bool frozen);
  void zero_grad();

  std::int64_t training_step() const { return training_step_; }
  void set_training_step(std::int64_t step) { training_step_ = step; }

  const std::string& kind() const { return kind_; }
  const nlohmann::json& config() const { return config_; }
  /// Hash of kind and canonical config serialization.
  const std::string& fingerprint() const { return fingerprint_; }

  /// FNV-1a over parameter names and bytes, in registration order.
  std::uint64_t checksum() const;

  CheckpointSection to_section(const std::string& section_name) const;
  /// Loads values, freeze flag and step. Throws FingerprintError when the
  /// section was written by a differently configured model.
  void load_section(const CheckpointSection& section);
  /// Copies parameter and buffer values from a model with the same fingerprint.
  void copy_values_from(const ModelState& other);

 private:
  std::string kind_;
  nlohmann::json config_;
  std::string fingerprint_;
  std::vector<std::pair<std::string, ag::Var>> parameters_;
  std::vector<std::pair<std::string, Tensor>> buffers_;
  bool frozen_ = false;
  std::int64_t training_step_ = 0;
};

std::string config_fingerprint(const std::string& kind, const nlohmann::json& config);

}  // namespace aesop
