// Bias-corrected Adam with decoupled weight decay.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace evloc {

struct AdamWConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;

  void validate() const;
};

struct OptimizerState {
  OptimizerState() = default;
  OptimizerState(AdamWConfig cfg, std::size_t n_params);

  AdamWConfig config;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step = 0;
};

/// One update of `params` in place. Sizes of grads, params and the state must agree.
void adamw_step(OptimizerState& state, std::span<const double> grads, std::span<double> params);

}  // namespace evloc
