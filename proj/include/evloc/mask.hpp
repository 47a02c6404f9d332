// Differentiable temporal masks.
//
// A mask is a per-frame weight vector sampled from a kernel centred at
// `center` with scale `width / temperature`. Frame j of N sits at the cell
// midpoint t_j = (j + 0.5) / N in normalized video time.
//
//   gaussian     exp(-(t - c)^2 / (2 s^2))        s = w / temperature
//   cauchy       1 / (1 + ((t - c) / s)^2)
//   hard_binary  1 if |t - c| <= w / 2 else 0
//
// hard_binary has no useful derivative; mask_derivatives() returns the
// gaussian kernel's derivatives for it (straight-through surrogate).

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace evloc {

enum class MaskKind { gaussian, cauchy, hard_binary };

std::string_view to_string(MaskKind kind);
/// Parses "gaussian" | "cauchy" | "hard_binary"; throws InvalidParameter.
MaskKind parse_mask_kind(std::string_view text);

struct MaskParams {
  double center = 0.5;
  double width = 0.5;

  friend bool operator==(const MaskParams&, const MaskParams&) = default;
};

/// Unconstrained optimization variables behind a MaskParams.
struct RawMaskParams {
  double raw_center = 0.0;
  double raw_width = 0.0;

  friend bool operator==(const RawMaskParams&, const RawMaskParams&) = default;
};

struct EngineConfig {
  double temperature = 4.0;
  std::size_t n_frames = 32;
  double width_max = 1.0;

  void validate() const;
};

struct Mask {
  std::vector<double> weights;
  MaskKind kind = MaskKind::gaussian;

  std::size_t size() const noexcept { return weights.size(); }
};

/// d weight_j / d center and d weight_j / d width for every frame.
struct MaskDerivatives {
  std::vector<double> d_center;
  std::vector<double> d_width;
};

/// Derivatives of constrain() with respect to the raw coordinates.
struct ConstrainJacobian {
  double d_center_d_raw = 0.0;
  double d_width_d_raw = 0.0;
};

double frame_time(std::size_t frame, std::size_t n_frames);

/// center = logistic(raw_center), width = width_max * logistic(raw_width).
/// Both results are kept strictly inside (0, 1) and (0, width_max).
MaskParams constrain(RawMaskParams raw, const EngineConfig& cfg);
ConstrainJacobian constrain_jacobian(RawMaskParams raw, const EngineConfig& cfg);
/// Inverse of constrain(); params must be strictly inside their ranges.
RawMaskParams unconstrain(MaskParams params, const EngineConfig& cfg);

void validate(MaskParams params, const EngineConfig& cfg);

Mask make_mask(MaskKind kind, MaskParams params, const EngineConfig& cfg);
MaskDerivatives mask_derivatives(MaskKind kind, MaskParams params, const EngineConfig& cfg);

Mask inverse_mask(const Mask& mask);

/// Mask centred halfway between two events with a fixed width. Inter-mask
/// widths may exceed the engine's width_max; they are not learned.
MaskParams inter_mask_params(MaskParams a, MaskParams b, double w_inter);
/// Inter-mask parameters for every consecutive pair, in event order.
std::vector<MaskParams> inter_mask_params(std::span<const MaskParams> events, double w_inter);

/// Equal-width gaussian masks tiling [0, 1]: centers (i + 0.5) / n, width 1 / n.
std::vector<MaskParams> fixed_uniform_params(std::size_t n_events);
std::vector<Mask> fixed_uniform_masks(std::size_t n_events, const EngineConfig& cfg);

}  // namespace evloc
