#include "evloc/adamw.hpp"

#include <cmath>

#include "evloc/error.hpp"

namespace evloc {

void AdamWConfig::validate() const {
  require(lr > 0.0 && std::isfinite(lr), ErrorKind::InvalidParameter, "learning rate must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0, ErrorKind::InvalidParameter, "beta1 must lie in [0, 1)");
  require(beta2 >= 0.0 && beta2 < 1.0, ErrorKind::InvalidParameter, "beta2 must lie in [0, 1)");
  require(eps > 0.0, ErrorKind::InvalidParameter, "eps must be positive");
  require(weight_decay >= 0.0, ErrorKind::InvalidParameter, "weight decay must be >= 0");
}

OptimizerState::OptimizerState(AdamWConfig cfg, std::size_t n_params)
    : config(cfg), first_moment(n_params, 0.0), second_moment(n_params, 0.0) {
  config.validate();
}

void adamw_step(OptimizerState& state, std::span<const double> grads, std::span<double> params) {
  const std::size_t n = params.size();
  require(grads.size() == n && state.first_moment.size() == n && state.second_moment.size() == n,
          ErrorKind::ShapeError, "optimizer state, gradients and parameters differ in size");
  const AdamWConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t k = 0; k < n; ++k) {
    const double g = grads[k];
    double& m = state.first_moment[k];
    double& v = state.second_moment[k];
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g * g;
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    params[k] -= c.lr * (m_hat / (std::sqrt(v_hat) + c.eps) + c.weight_decay * params[k]);
  }
}

}  // namespace evloc
