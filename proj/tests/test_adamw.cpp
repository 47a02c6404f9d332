#include <doctest.h>

#include <cmath>
#include <vector>

#include "evloc/adamw.hpp"
#include "evloc/error.hpp"

using namespace evloc;

TEST_CASE("zero gradient and zero decay leave parameters unchanged") {
  OptimizerState state(AdamWConfig{}, 3);
  std::vector<double> p{0.1, -2.0, 3.5};
  const auto before = p;
  const std::vector<double> g(3, 0.0);
  for (int i = 0; i < 5; ++i) adamw_step(state, g, p);
  CHECK(p == before);
  CHECK(state.step == 5);
}

TEST_CASE("first step moves each parameter by lr against the gradient sign") {
  AdamWConfig cfg;
  cfg.lr = 1e-3;
  OptimizerState state(cfg, 3);
  std::vector<double> p{0.0, 0.0, 0.0};
  const std::vector<double> g{0.5, -3.0, 1e-3};
  adamw_step(state, g, p);
  // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps)
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(p[k] == doctest::Approx(-cfg.lr * g[k] / (std::abs(g[k]) + cfg.eps)).epsilon(1e-12));
  }
}

TEST_CASE("two identical steps follow the reference moment recurrence") {
  AdamWConfig cfg;
  cfg.lr = 0.01;
  cfg.weight_decay = 0.1;
  OptimizerState state(cfg, 1);
  std::vector<double> p{1.0};
  const std::vector<double> g{0.4};
  double m = 0, v = 0, x = 1.0;
  for (int t = 1; t <= 2; ++t) {
    adamw_step(state, g, p);
    m = 0.9 * m + 0.1 * 0.4;
    v = 0.999 * v + 0.001 * 0.16;
    const double mh = m / (1 - std::pow(0.9, t));
    const double vh = v / (1 - std::pow(0.999, t));
    x = x - 0.01 * (mh / (std::sqrt(vh) + 1e-8) + 0.1 * x);
    CHECK(p[0] == doctest::Approx(x).epsilon(1e-14));
  }
}

TEST_CASE("optimizer validation") {
  AdamWConfig bad;
  bad.lr = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  OptimizerState state(AdamWConfig{}, 2);
  std::vector<double> p(3), g(3);
  CHECK_THROWS_AS(adamw_step(state, g, p), Error);
}
