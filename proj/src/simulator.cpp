#include "evloc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "evloc/error.hpp"
#include "evloc/mask.hpp"

namespace evloc {
namespace {

constexpr double kMinGap = 0.01;
constexpr int kMaxLayoutTries = 1000;
constexpr int kMaxPrototypeTries = 10000;

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

// Splits `free` into n non-negative parts with a flat Dirichlet draw.
std::vector<double> split(Rng& rng, double free, std::size_t n) {
  std::vector<double> parts(n);
  double sum = 0.0;
  for (double& p : parts) {
    p = -std::log(1.0 - uniform(rng, 0.0, 1.0));
    sum += p;
  }
  for (double& p : parts) p = free * p / sum;
  return parts;
}

std::vector<Segment> place(std::span<const double> durations, std::span<const double> gaps) {
  std::vector<Segment> segs;
  double t = gaps[0];
  for (std::size_t k = 0; k < durations.size(); ++k) {
    segs.push_back({t, std::min(1.0, t + durations[k])});
    t += durations[k] + gaps[k + 1];
  }
  return segs;
}

bool every_event_has_a_frame(const std::vector<Segment>& segs, std::size_t n_frames) {
  for (const Segment& s : segs) {
    bool hit = false;
    for (std::size_t j = 0; j < n_frames && !hit; ++j) {
      const double t = frame_time(j, n_frames);
      hit = t >= s.start && t < s.end;
    }
    if (!hit) return false;
  }
  return true;
}

std::vector<Segment> draw_layout(Rng& rng, const ScenarioSpec& spec, std::size_t k) {
  const double kd = static_cast<double>(k);
  if (spec.layout == LayoutMode::uniform) {
    const double inset = 0.05 / kd;
    std::vector<Segment> segs;
    for (std::size_t i = 0; i < k; ++i) {
      const double lo = static_cast<double>(i) / kd;
      segs.push_back({lo + inset, lo + 1.0 / kd - inset});
    }
    require(every_event_has_a_frame(segs, spec.n_frames), ErrorKind::LayoutError,
            "events are shorter than one frame");
    return segs;
  }

  const double min_duration = spec.layout == LayoutMode::heterogeneous_durations ? 0.05 : 0.04;
  require(kd * min_duration + (kd + 1.0) * kMinGap <= 1.0, ErrorKind::LayoutError,
          std::to_string(k) + " events cannot fit in one video");
  for (int attempt = 0; attempt < kMaxLayoutTries; ++attempt) {
    std::vector<double> durations(k);
    if (spec.layout == LayoutMode::heterogeneous_durations) {
      for (double& d : durations) d = log_uniform(rng, 0.05, 0.3);
    } else {
      // one long event among short ones, in random position
      for (double& d : durations) d = uniform(rng, 0.06, 0.18);
      const auto longest = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
      durations[longest] = uniform(rng, 0.45, 0.7);
      const double total = std::accumulate(durations.begin(), durations.end(), 0.0);
      const double budget = 1.0 - (kd + 1.0) * kMinGap - 0.05;
      if (total > budget) {
        for (double& d : durations) d *= budget / total;
      }
    }
    const double used = std::accumulate(durations.begin(), durations.end(), 0.0);
    const double free = 1.0 - used - (kd + 1.0) * kMinGap;
    if (free < 0.0) continue;
    std::vector<double> gaps = split(rng, free, k + 1);
    for (double& g : gaps) g += kMinGap;
    std::vector<Segment> segs = place(durations, gaps);
    if (every_event_has_a_frame(segs, spec.n_frames)) return segs;
  }
  throw Error(ErrorKind::LayoutError, "could not place " + std::to_string(k) + " events on " +
                                          std::to_string(spec.n_frames) + " frames");
}

std::vector<double> random_unit(Rng& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = normal(rng);
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// Draws `count` unit vectors, redrawing each until its |cos| with every
// earlier one is at most kMaxPrototypeCosine.
std::vector<std::vector<double>> draw_prototypes(Rng& rng, std::size_t count, std::size_t dim) {
  std::vector<std::vector<double>> out;
  out.reserve(count);
  while (out.size() < count) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPrototypeTries && !placed; ++attempt) {
      std::vector<double> v = random_unit(rng, dim);
      placed = std::all_of(out.begin(), out.end(), [&](const std::vector<double>& u) {
        return std::abs(dot(u, v)) <= kMaxPrototypeCosine;
      });
      if (placed) out.push_back(std::move(v));
    }
    require(placed, ErrorKind::LayoutError,
            "cannot draw " + std::to_string(count) + " near-orthogonal prototypes in dimension " +
                std::to_string(dim));
  }
  return out;
}

std::vector<double> normalized_mean(std::span<const double> a, std::span<const double> b) {
  std::vector<double> m(a.size());
  double norm = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m[i] = 0.5 * (a[i] + b[i]);
    norm += m[i] * m[i];
  }
  norm = std::sqrt(norm);
  require(norm > 0.0, ErrorKind::NumericalError, "flanking captions cancel exactly");
  for (double& x : m) x /= norm;
  return m;
}

std::string video_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "vid%05zu", index);
  return buf;
}

}  // namespace

std::string_view to_string(LayoutMode mode) {
  switch (mode) {
    case LayoutMode::uniform: return "uniform";
    case LayoutMode::non_uniform: return "non_uniform";
    case LayoutMode::heterogeneous_durations: return "heterogeneous_durations";
  }
  return "unknown";
}

LayoutMode parse_layout_mode(std::string_view text) {
  if (text == "uniform") return LayoutMode::uniform;
  if (text == "non_uniform") return LayoutMode::non_uniform;
  if (text == "heterogeneous_durations") return LayoutMode::heterogeneous_durations;
  throw Error(ErrorKind::InvalidParameter, "unknown layout '" + std::string(text) + "'");
}

void ScenarioSpec::validate() const {
  require(n_videos >= 1, ErrorKind::InvalidParameter, "n_videos must be >= 1");
  require(n_frames >= 4, ErrorKind::InvalidParameter, "n_frames must be >= 4");
  require(embed_dim >= 2, ErrorKind::InvalidParameter, "embed_dim must be >= 2");
  require(min_events >= 1 && min_events <= max_events, ErrorKind::InvalidParameter,
          "event count range must satisfy 1 <= min <= max");
  require(noise_sigma >= 0.0 && std::isfinite(noise_sigma), ErrorKind::InvalidParameter,
          "noise_sigma must be >= 0");
  require(transition_fraction >= 0.0 && transition_fraction <= 1.0, ErrorKind::InvalidParameter,
          "transition_fraction must lie in [0, 1]");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

SyntheticVideo gen_video(const ScenarioSpec& spec, std::size_t video_index) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, video_index));
  const std::size_t k =
      std::uniform_int_distribution<std::size_t>(spec.min_events, spec.max_events)(rng);
  const std::vector<Segment> segs = draw_layout(rng, spec, k);

  std::vector<bool> annotated_gap(k > 0 ? k - 1 : 0, false);
  std::size_t n_transitions = 0;
  for (std::size_t g = 0; g + 1 < k; ++g) {
    const bool draw = uniform(rng, 0.0, 1.0) < spec.transition_fraction;
    annotated_gap[g] = draw && segs[g + 1].start > segs[g].end;
    n_transitions += annotated_gap[g] ? 1 : 0;
  }

  // events, then background, then transitions
  const auto protos = draw_prototypes(rng, k + 1 + n_transitions, spec.embed_dim);

  SyntheticVideo video;
  video.id = video_id(video_index);
  video.event_segments = segs;
  video.hidden_segments = segs;
  video.source_index.resize(k);
  std::iota(video.source_index.begin(), video.source_index.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) video.captions.push_row(protos[i]);
  std::size_t next = k + 1;
  for (std::size_t g = 0; g + 1 < k; ++g) {
    if (!annotated_gap[g]) continue;
    video.transitions.push_back({g, {segs[g].end, segs[g + 1].start}, protos[next++]});
  }

  const std::size_t n = spec.n_frames;
  video.frames = EmbeddingMatrix(n, spec.embed_dim);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = frame_time(j, n);
    const std::vector<double>* source = &protos[k];
    for (std::size_t i = 0; i < k; ++i) {
      if (t >= segs[i].start && t < segs[i].end) source = &protos[i];
    }
    for (const Transition& tr : video.transitions) {
      if (t >= tr.segment.start && t < tr.segment.end) source = &tr.embedding;
    }
    auto row = video.frames.row(j);
    for (std::size_t d = 0; d < spec.embed_dim; ++d) {
      row[d] = (*source)[d] + (spec.noise_sigma > 0.0 ? spec.noise_sigma * noise(rng) : 0.0);
    }
  }
  return video;
}

std::vector<SyntheticVideo> gen_dataset(const ScenarioSpec& spec) {
  spec.validate();
  std::vector<SyntheticVideo> out;
  out.reserve(spec.n_videos);
  for (std::size_t i = 0; i < spec.n_videos; ++i) out.push_back(gen_video(spec, i));
  return out;
}

std::size_t retained_count(std::size_t n_events, double keep_ratio) {
  require(keep_ratio > 0.0 && keep_ratio <= 1.0, ErrorKind::InvalidParameter,
          "keep_ratio must lie in (0, 1]");
  // the tolerance absorbs representation error such as 0.7 * 10 = 7.000000000000001
  const double raw = std::ceil(keep_ratio * static_cast<double>(n_events) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 0.0)), 1, n_events);
}

SyntheticVideo sparsify(const SyntheticVideo& video, const SparsifyPolicy& policy) {
  const std::size_t n = video.captions.rows();
  require(n >= 1, ErrorKind::EmptyEvents, "cannot sparsify a video without events");
  const std::size_t keep = retained_count(n, policy.keep_ratio);
  if (keep == n) return video;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(policy.seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(keep);
  std::sort(order.begin(), order.end());

  SyntheticVideo out;
  out.id = video.id;
  out.frames = video.frames;
  out.transitions = video.transitions;
  out.hidden_segments = video.hidden_segments;
  for (std::size_t i : order) {
    out.event_segments.push_back(video.event_segments[i]);
    out.captions.push_row(video.captions.row(i));
    out.source_index.push_back(video.source_index[i]);
  }
  return out;
}

std::vector<SyntheticVideo> sparsify_dataset(std::span<const SyntheticVideo> videos,
                                             const SparsifyPolicy& policy) {
  std::vector<SyntheticVideo> out;
  out.reserve(videos.size());
  for (std::size_t i = 0; i < videos.size(); ++i) {
    out.push_back(sparsify(videos[i], {policy.keep_ratio, derive_seed(policy.seed, i)}));
  }
  return out;
}

EmbeddingMatrix oracle_transition_embeddings(const SyntheticVideo& video) {
  const std::size_t n = video.captions.rows();
  require(n >= 2, ErrorKind::EmptyResult, "transition embeddings need at least two events");
  EmbeddingMatrix out;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t a = video.source_index[i];
    const std::size_t b = video.source_index[i + 1];
    const Transition* match = nullptr;
    if (b == a + 1) {
      for (const Transition& tr : video.transitions) {
        if (tr.after_event == a) match = &tr;
      }
    }
    if (match != nullptr) {
      out.push_row(match->embedding);
    } else {
      out.push_row(normalized_mean(video.captions.row(i), video.captions.row(i + 1)));
    }
  }
  return out;
}

VideoSample to_sample(const SyntheticVideo& video, bool with_synthetic) {
  VideoSample s;
  s.id = video.id;
  s.frames = video.frames;
  s.captions = video.captions;
  if (with_synthetic && video.captions.rows() >= 2) s.synthetic = oracle_transition_embeddings(video);
  s.ground_truth = video.hidden_segments;
  s.caption_segments = video.event_segments;
  return s;
}

std::vector<VideoSample> to_samples(std::span<const SyntheticVideo> videos, bool with_synthetic) {
  std::vector<VideoSample> out;
  out.reserve(videos.size());
  for (const SyntheticVideo& v : videos) out.push_back(to_sample(v, with_synthetic));
  return out;
}

DatasetStats dataset_stats(std::span<const SyntheticVideo> videos) {
  require(!videos.empty(), ErrorKind::EmptyDataset, "no videos");
  DatasetStats st;
  st.videos = videos.size();
  st.min_events = videos.front().captions.rows();
  st.max_events = st.min_events;
  for (const SyntheticVideo& v : videos) {
    const std::size_t n = v.captions.rows();
    st.mean_events += static_cast<double>(n);
    st.min_events = std::min(st.min_events, n);
    st.max_events = std::max(st.max_events, n);
    st.mean_true_events += static_cast<double>(v.hidden_segments.size());
    for (const Segment& s : v.event_segments) st.annotated_coverage += s.length();
    for (const Segment& s : v.hidden_segments) st.true_coverage += s.length();
  }
  const double nv = static_cast<double>(videos.size());
  st.mean_events /= nv;
  st.mean_true_events /= nv;
  st.annotated_coverage /= nv;
  st.true_coverage /= nv;
  return st;
}

}  // namespace evloc
