// Learnable mask parameters and the analytic gradient of the combined loss.
//
// Every annotated event owns a RawMaskParams pair that is optimized directly;
// constrain() maps it into (center, width). backward() differentiates
//
//   total = sim + sim_inverse + lambda_div * diversity + alpha_aug * aug + external
//
// through hinge -> cosine -> pooling -> mask kernel -> constrain. Inter-mask
// centers pass half of their gradient to each flanking event center; the
// inter-mask width is a fixed hyperparameter and receives none.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "evloc/losses.hpp"
#include "evloc/mask.hpp"
#include "evloc/sample.hpp"

namespace evloc {

/// Ragged per-video, per-event table of (raw_center, raw_width) pairs stored
/// flat so the optimizer can treat it as one vector.
class EventTable {
 public:
  EventTable() = default;
  explicit EventTable(std::span<const std::size_t> events_per_video);

  std::size_t n_videos() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t n_events(std::size_t video) const { return offsets_[video + 1] - offsets_[video]; }
  std::size_t total_events() const noexcept { return values_.size() / 2; }

  RawMaskParams get(std::size_t video, std::size_t event) const;
  void set(std::size_t video, std::size_t event, RawMaskParams value);
  void add(std::size_t video, std::size_t event, double d_center, double d_width);

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool same_shape(const EventTable& other) const noexcept { return offsets_ == other.offsets_; }

  friend bool operator==(const EventTable&, const EventTable&) = default;

 private:
  std::size_t index(std::size_t video, std::size_t event) const;

  std::vector<std::size_t> offsets_;
  std::vector<double> values_;
};

class ParamSet : public EventTable {
 public:
  using EventTable::EventTable;
};

class GradientSet : public EventTable {
 public:
  using EventTable::EventTable;
};

struct TermSwitches {
  bool sim = true;
  bool sim_inverse = true;
  bool aug = true;
  bool diversity = true;
};

struct ObjectiveConfig {
  EngineConfig engine;
  LossConfig loss;
  MaskKind kind = MaskKind::gaussian;
  double w_inter = 0.6;
  TermSwitches terms;
  /// Captioning losses computed elsewhere; added to the total unchanged.
  double external = 0.0;

  void validate() const;
};

/// Indices into a dataset forming one mini-batch.
struct Batch {
  std::span<const VideoSample> videos;
  std::vector<std::size_t> indices;

  static Batch all(std::span<const VideoSample> videos);
};

/// Raw parameters whose constrained values reproduce fixed_uniform_params()
/// for each video (widths are pulled just below width_max when needed).
ParamSet initial_params(std::span<const VideoSample> videos, const EngineConfig& cfg);
std::vector<std::vector<MaskParams>> constrained_params(const ParamSet& params,
                                                        const EngineConfig& cfg);

LossBreakdown forward(const Batch& batch, const ParamSet& params, const ObjectiveConfig& cfg);
std::pair<LossBreakdown, GradientSet> backward(const Batch& batch, const ParamSet& params,
                                               const ObjectiveConfig& cfg);

/// Central differences (f(x+h) - f(x-h)) / 2h per coordinate.
GradientSet finite_diff_grad(const std::function<double(const ParamSet&)>& loss_fn,
                             const ParamSet& params, double h = 1e-5);

}  // namespace evloc
