#include "evloc/mask.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "evloc/error.hpp"

namespace evloc {
namespace {

// Keeps constrained values off the open-interval boundaries when the
// logistic saturates in double precision.
constexpr double kBoundaryGuard = 1e-12;

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double guarded_unit(double x) { return std::clamp(x, kBoundaryGuard, 1.0 - kBoundaryGuard); }

void check_finite(RawMaskParams raw) {
  require(std::isfinite(raw.raw_center) && std::isfinite(raw.raw_width), ErrorKind::InvalidParameter,
          "raw mask parameters must be finite");
}

double kernel_scale(MaskParams params, const EngineConfig& cfg) {
  const double scale = params.width / cfg.temperature;
  require(scale * scale > 0.0 && std::isfinite(scale), ErrorKind::DegenerateWidth,
          "mask scale width/temperature = " + std::to_string(scale) + " is not a positive finite value");
  return scale;
}

}  // namespace

std::string_view to_string(MaskKind kind) {
  switch (kind) {
    case MaskKind::gaussian: return "gaussian";
    case MaskKind::cauchy: return "cauchy";
    case MaskKind::hard_binary: return "hard_binary";
  }
  return "unknown";
}

MaskKind parse_mask_kind(std::string_view text) {
  if (text == "gaussian") return MaskKind::gaussian;
  if (text == "cauchy") return MaskKind::cauchy;
  if (text == "hard_binary") return MaskKind::hard_binary;
  throw Error(ErrorKind::InvalidParameter, "unknown mask kind '" + std::string(text) + "'");
}

void EngineConfig::validate() const {
  require(temperature > 0.0 && std::isfinite(temperature), ErrorKind::InvalidParameter,
          "temperature must be positive");
  require(n_frames >= 2, ErrorKind::InvalidParameter, "n_frames must be at least 2");
  require(width_max > 0.0 && std::isfinite(width_max), ErrorKind::InvalidParameter,
          "width_max must be positive");
}

double frame_time(std::size_t frame, std::size_t n_frames) {
  return (static_cast<double>(frame) + 0.5) / static_cast<double>(n_frames);
}

MaskParams constrain(RawMaskParams raw, const EngineConfig& cfg) {
  check_finite(raw);
  return {guarded_unit(logistic(raw.raw_center)), cfg.width_max * guarded_unit(logistic(raw.raw_width))};
}

ConstrainJacobian constrain_jacobian(RawMaskParams raw, const EngineConfig& cfg) {
  check_finite(raw);
  const double c = logistic(raw.raw_center);
  const double w = logistic(raw.raw_width);
  return {c * (1.0 - c), cfg.width_max * w * (1.0 - w)};
}

RawMaskParams unconstrain(MaskParams params, const EngineConfig& cfg) {
  validate(params, cfg);
  require(params.width < cfg.width_max, ErrorKind::InvalidParameter,
          "width must be strictly below width_max to invert the logistic");
  const double u = params.width / cfg.width_max;
  return {std::log(params.center / (1.0 - params.center)), std::log(u / (1.0 - u))};
}

void validate(MaskParams params, const EngineConfig& cfg) {
  require(params.center > 0.0 && params.center < 1.0, ErrorKind::InvalidParameter,
          "mask center " + std::to_string(params.center) + " outside (0, 1)");
  require(params.width > 0.0 && params.width <= cfg.width_max, ErrorKind::InvalidParameter,
          "mask width " + std::to_string(params.width) + " outside (0, width_max]");
}

Mask make_mask(MaskKind kind, MaskParams params, const EngineConfig& cfg) {
  require(std::isfinite(params.center) && std::isfinite(params.width) && params.width >= 0.0,
          ErrorKind::InvalidParameter, "mask parameters must be finite with non-negative width");
  const double scale = kernel_scale(params, cfg);
  const std::size_t n = cfg.n_frames;
  Mask mask{std::vector<double>(n), kind};
  for (std::size_t j = 0; j < n; ++j) {
    const double dt = frame_time(j, n) - params.center;
    double value = 0.0;
    switch (kind) {
      case MaskKind::gaussian: value = std::exp(-(dt * dt) / (2.0 * scale * scale)); break;
      case MaskKind::cauchy: {
        const double u = dt / scale;
        value = 1.0 / (1.0 + u * u);
        break;
      }
      case MaskKind::hard_binary: value = std::abs(dt) <= params.width / 2.0 ? 1.0 : 0.0; break;
    }
    mask.weights[j] = value;
  }
  return mask;
}

MaskDerivatives mask_derivatives(MaskKind kind, MaskParams params, const EngineConfig& cfg) {
  const double scale = kernel_scale(params, cfg);
  const std::size_t n = cfg.n_frames;
  MaskDerivatives out{std::vector<double>(n), std::vector<double>(n)};
  const double w = params.width;
  for (std::size_t j = 0; j < n; ++j) {
    const double dt = frame_time(j, n) - params.center;
    const double u = dt / scale;
    if (kind == MaskKind::cauchy) {
      const double m = 1.0 / (1.0 + u * u);
      out.d_center[j] = 2.0 * u * m * m / scale;
      out.d_width[j] = 2.0 * u * u * m * m / w;
    } else {
      // gaussian, and the surrogate for hard_binary
      const double m = std::exp(-0.5 * u * u);
      out.d_center[j] = m * u / scale;
      out.d_width[j] = m * u * u / w;
    }
  }
  return out;
}

Mask inverse_mask(const Mask& mask) {
  Mask out{std::vector<double>(mask.weights.size()), mask.kind};
  std::transform(mask.weights.begin(), mask.weights.end(), out.weights.begin(),
                 [](double v) { return 1.0 - v; });
  return out;
}

MaskParams inter_mask_params(MaskParams a, MaskParams b, double w_inter) {
  require(w_inter > 0.0 && std::isfinite(w_inter), ErrorKind::InvalidParameter,
          "w_inter must be positive");
  return {0.5 * (a.center + b.center), w_inter};
}

std::vector<MaskParams> inter_mask_params(std::span<const MaskParams> events, double w_inter) {
  std::vector<MaskParams> out;
  if (events.size() < 2) return out;
  out.reserve(events.size() - 1);
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    out.push_back(inter_mask_params(events[i], events[i + 1], w_inter));
  }
  return out;
}

std::vector<MaskParams> fixed_uniform_params(std::size_t n_events) {
  require(n_events >= 1, ErrorKind::EmptyEvents, "fixed-uniform masks need at least one event");
  const double n = static_cast<double>(n_events);
  std::vector<MaskParams> out(n_events);
  for (std::size_t i = 0; i < n_events; ++i) out[i] = {(static_cast<double>(i) + 0.5) / n, 1.0 / n};
  return out;
}

std::vector<Mask> fixed_uniform_masks(std::size_t n_events, const EngineConfig& cfg) {
  std::vector<Mask> out;
  for (const MaskParams& p : fixed_uniform_params(n_events)) {
    out.push_back(make_mask(MaskKind::gaussian, p, cfg));
  }
  return out;
}

}  // namespace evloc
