#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pretrec/numeric/autodiff.hpp"

namespace pretrec {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamState() = default;
  AdamState(std::size_t rows, std::size_t cols, AdamConfig cfg)
      : first_moment(rows, cols), second_moment(rows, cols), config(cfg) {}

  Tensor2 first_moment;
  Tensor2 second_moment;
  std::uint64_t step = 0;
  AdamConfig config;
};

// One bias-corrected Adam update of `param.value` from `param.gradient`. The gradient is left
// untouched. Throws ConfigError when shapes disagree; no-op for frozen parameters.
void adam_step(Parameter& param, AdamState& state);

// Owns one AdamState per registered parameter.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig config);

  void zero_grad();
  void step();
  std::span<Parameter* const> parameters() const noexcept { return params_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<AdamState> states_;
};

}  // namespace pretrec
