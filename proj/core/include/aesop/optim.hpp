#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aesop/checkpoint.hpp"
#include "aesop/model_state.hpp"

namespace aesop {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam over the parameters of one ModelState. Parameters without an
/// accumulated gradient are skipped for that step (their moments stay put).
class Adam {
 public:
  Adam(ModelState& model, AdamConfig cfg = {});

  void step();
  std::int64_t steps_taken() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

  CheckpointSection to_section(const std::string& section_name) const;
  void load_section(const CheckpointSection& section);

 private:
  ModelState* model_;
  AdamConfig cfg_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::int64_t t_ = 0;
};

}  // namespace aesop
