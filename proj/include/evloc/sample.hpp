// Per-video training/evaluation record shared by dataio, simulator and optim.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evloc/embedding.hpp"

namespace evloc {

/// Closed interval of normalized video time, 0 <= start < end <= 1.
struct Segment {
  double start = 0.0;
  double end = 1.0;

  double length() const noexcept { return end - start; }
  double center() const noexcept { return 0.5 * (start + end); }
  void validate() const;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct VideoSample {
  std::string id;
  EmbeddingMatrix frames;    // N_v x D
  EmbeddingMatrix captions;  // N_s x D, row order = event order
  /// N_s - 1 transition caption embeddings; absent disables the aug term.
  std::optional<EmbeddingMatrix> synthetic;
  /// Every true event, annotated or not (evaluation only).
  std::optional<std::vector<Segment>> ground_truth;
  /// Segment of each annotated caption, in caption order (evaluation only).
  std::optional<std::vector<Segment>> caption_segments;

  std::size_t n_events() const noexcept { return captions.rows(); }
};

}  // namespace evloc
