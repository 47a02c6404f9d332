// Synthetic videos built from piecewise-constant embedding prototypes.
//
// Each event, the background and every annotated transition gap gets its own
// unit prototype; prototypes are redrawn until all pairwise |cos| <= 0.3.
// Frames take the prototype of whatever covers their timestamp plus isotropic
// gaussian noise. Caption embeddings equal the event prototypes (the mean of
// a constant noiseless segment, normalized).
//
// Video i draws from a generator seeded by (spec.seed, i), so any subset of
// videos can be generated independently and in any order.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evloc/embedding.hpp"
#include "evloc/sample.hpp"

namespace evloc {

enum class LayoutMode {
  uniform,                  // equal events on the uniform tiling grid
  non_uniform,              // mixed long/short events at irregular positions
  heterogeneous_durations,  // durations log-uniform in [0.05, 0.3]
};

std::string_view to_string(LayoutMode mode);
LayoutMode parse_layout_mode(std::string_view text);

inline constexpr double kMaxPrototypeCosine = 0.3;

struct ScenarioSpec {
  std::size_t n_videos = 20;
  std::size_t n_frames = 64;
  std::size_t embed_dim = 16;
  std::size_t min_events = 3;
  std::size_t max_events = 3;
  LayoutMode layout = LayoutMode::non_uniform;
  double noise_sigma = 0.05;
  /// Probability that an inter-event gap gets its own transition prototype.
  double transition_fraction = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Transition {
  std::size_t after_event = 0;  // gap between true events after_event and after_event + 1
  Segment segment;
  std::vector<double> embedding;
};

struct SyntheticVideo {
  std::string id;
  EmbeddingMatrix frames;
  std::vector<Segment> event_segments;    // annotated events, in temporal order
  EmbeddingMatrix captions;               // one row per annotated event
  std::vector<std::size_t> source_index;  // true-event index of each annotated event
  std::vector<Transition> transitions;
  std::vector<Segment> hidden_segments;   // every true event, annotated or not
};

struct SparsifyPolicy {
  double keep_ratio = 1.0;
  std::uint64_t seed = 0;
};

SyntheticVideo gen_video(const ScenarioSpec& spec, std::size_t video_index);
std::vector<SyntheticVideo> gen_dataset(const ScenarioSpec& spec);

/// Keeps ceil(keep_ratio * N_s) events chosen uniformly without replacement.
SyntheticVideo sparsify(const SyntheticVideo& video, const SparsifyPolicy& policy);
/// Applies `policy` to every video with a per-video seed derived from policy.seed.
std::vector<SyntheticVideo> sparsify_dataset(std::span<const SyntheticVideo> videos,
                                             const SparsifyPolicy& policy);
std::size_t retained_count(std::size_t n_events, double keep_ratio);

/// One row per adjacent annotated pair: the gap's transition prototype when
/// the pair is adjacent in truth and the gap is annotated, else the
/// normalized mean of the two captions. Throws EmptyResult below two events.
EmbeddingMatrix oracle_transition_embeddings(const SyntheticVideo& video);

VideoSample to_sample(const SyntheticVideo& video, bool with_synthetic);
std::vector<VideoSample> to_samples(std::span<const SyntheticVideo> videos, bool with_synthetic);

struct DatasetStats {
  std::size_t videos = 0;
  double mean_events = 0.0;  // annotated
  std::size_t min_events = 0;
  std::size_t max_events = 0;
  double mean_true_events = 0.0;
  double annotated_coverage = 0.0;  // mean fraction of video time inside annotated events
  double true_coverage = 0.0;
};

DatasetStats dataset_stats(std::span<const SyntheticVideo> videos);

/// Deterministic 64-bit seed for stream `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace evloc
