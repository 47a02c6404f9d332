// Mini-batch training loop around the combined objective.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "evloc/adamw.hpp"
#include "evloc/objective.hpp"

namespace evloc {

struct TrainConfig {
  ObjectiveConfig objective;
  AdamWConfig optimizer;
  std::size_t batch_size = 8;
  std::size_t steps = 3000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainReport {
  std::vector<LossBreakdown> history;  // one entry per step, batch loss
  std::vector<std::vector<MaskParams>> final_params;
  ParamSet final_raw;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
};

/// Trains from `init` (default: fixed-uniform initialization). Batches are
/// drawn by reshuffling the dataset each epoch with a generator seeded from
/// cfg.seed, so identical inputs give identical reports (wall_seconds aside).
TrainReport train(std::span<const VideoSample> dataset, const TrainConfig& cfg,
                  std::optional<ParamSet> init = std::nullopt);

/// One JSON object per line: step, sim, sim_inverse, aug, diversity, external, total.
void write_step_records(const TrainReport& report, std::ostream& out);

}  // namespace evloc
