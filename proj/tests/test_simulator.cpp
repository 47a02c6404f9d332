#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "evloc/error.hpp"
#include "evloc/mask.hpp"
#include "evloc/simulator.hpp"

using namespace evloc;

namespace {

double cos_rows(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  return ab / std::sqrt(aa * bb);
}

bool inside(const Segment& s, double t) { return t >= s.start && t < s.end; }

}  // namespace

TEST_CASE("noiseless frames reproduce their prototypes") {
  for (LayoutMode layout : {LayoutMode::uniform, LayoutMode::non_uniform, LayoutMode::heterogeneous_durations}) {
    ScenarioSpec spec;
    spec.layout = layout;
    spec.noise_sigma = 0.0;
    spec.min_events = 2;
    spec.max_events = 5;
    spec.transition_fraction = 0.5;
    for (std::size_t i = 0; i < 10; ++i) {
      const SyntheticVideo v = gen_video(spec, i);
      CHECK(v.frames.all_finite());
      for (std::size_t j = 0; j < spec.n_frames; ++j) {
        const double t = frame_time(j, spec.n_frames);
        for (std::size_t e = 0; e < v.event_segments.size(); ++e) {
          if (!inside(v.event_segments[e], t)) continue;
          CHECK(cos_rows(v.frames.row(j), v.captions.row(e)) == doctest::Approx(1.0).epsilon(1e-14));
          for (std::size_t k = 0; k < v.captions.rows(); ++k) {
            if (k != e) CHECK(std::abs(cos_rows(v.frames.row(j), v.captions.row(k))) <= kMaxPrototypeCosine + 1e-12);
          }
        }
        for (const Transition& tr : v.transitions) {
          if (inside(tr.segment, t)) CHECK(cos_rows(v.frames.row(j), tr.embedding) == doctest::Approx(1.0).epsilon(1e-14));
        }
      }
    }
  }
}

TEST_CASE("captions are unit prototypes") {
  ScenarioSpec spec;
  const SyntheticVideo v = gen_video(spec, 0);
  for (std::size_t e = 0; e < v.captions.rows(); ++e) {
    double n = 0;
    for (double x : v.captions.row(e)) n += x * x;
    CHECK(n == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("generation is deterministic per (spec, index)") {
  ScenarioSpec spec;
  spec.transition_fraction = 0.5;
  spec.min_events = 2;
  spec.max_events = 6;
  const auto all = gen_dataset(spec);
  REQUIRE(all.size() == spec.n_videos);
  for (std::size_t i : {0u, 7u, 19u}) {
    const SyntheticVideo v = gen_video(spec, i);
    CHECK(v.frames == all[i].frames);
    CHECK(v.event_segments == all[i].event_segments);
    CHECK(v.id == all[i].id);
  }
  spec.seed = 1;
  CHECK_FALSE(gen_video(spec, 0).frames == all[0].frames);
}

TEST_CASE("layout shapes") {
  ScenarioSpec spec;
  spec.min_events = 3;
  spec.max_events = 3;
  spec.layout = LayoutMode::uniform;
  for (const Segment& s : gen_video(spec, 0).event_segments) CHECK(s.length() == doctest::Approx(0.3));

  spec.layout = LayoutMode::non_uniform;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto segs = gen_video(spec, i).event_segments;
    double longest = 0, shortest = 1;
    for (const Segment& s : segs) {
      longest = std::max(longest, s.length());
      shortest = std::min(shortest, s.length());
    }
    CHECK(longest > 2.0 * shortest);
    for (std::size_t k = 0; k + 1 < segs.size(); ++k) CHECK(segs[k].end < segs[k + 1].start);
  }

  spec.layout = LayoutMode::heterogeneous_durations;
  for (std::size_t i = 0; i < 20; ++i) {
    for (const Segment& s : gen_video(spec, i).event_segments) {
      CHECK(s.length() >= 0.05 - 1e-12);
      CHECK(s.length() <= 0.3 + 1e-12);
    }
  }

  spec.min_events = spec.max_events = 20;
  CHECK_THROWS_AS(gen_video(spec, 0), Error);
  try {
    gen_video(spec, 0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LayoutError);
  }
}

TEST_CASE("sparsify keeps ceil(r * N) events in order") {
  CHECK(retained_count(4, 0.25) == 1);
  CHECK(retained_count(3, 0.5) == 2);
  CHECK(retained_count(4, 0.75) == 3);
  CHECK(retained_count(3, 1.0) == 3);
  CHECK(retained_count(1, 0.01) == 1);

  ScenarioSpec spec;
  spec.min_events = spec.max_events = 4;
  const SyntheticVideo v = gen_video(spec, 3);
  const SyntheticVideo same = sparsify(v, {1.0, 9});
  CHECK(same.event_segments == v.event_segments);
  CHECK(same.captions == v.captions);

  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SyntheticVideo s = sparsify(v, {0.5, seed});
    REQUIRE(s.event_segments.size() == 2);
    CHECK(s.captions.rows() == 2);
    CHECK(s.hidden_segments == v.hidden_segments);
    CHECK(s.source_index[0] < s.source_index[1]);
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(s.event_segments[k] == v.event_segments[s.source_index[k]]);
      const auto a = s.captions.row(k), b = v.captions.row(s.source_index[k]);
      CHECK(std::equal(a.begin(), a.end(), b.begin()));
    }
    CHECK(sparsify(v, {0.25, seed}).event_segments.size() == 1);
  }
  CHECK_THROWS_AS(sparsify(v, {0.0, 1}), Error);
}

TEST_CASE("oracle transition embeddings") {
  SyntheticVideo v;
  v.captions = EmbeddingMatrix(3, 2, {1, 0, 0, 1, 1, 0});
  v.event_segments = {{0.0, 0.2}, {0.3, 0.5}, {0.6, 0.9}};
  v.source_index = {0, 1, 2};
  v.transitions.push_back({0, {0.2, 0.3}, {0.6, -0.8}});
  const EmbeddingMatrix t = oracle_transition_embeddings(v);
  REQUIRE(t.rows() == 2);
  CHECK(t(0, 0) == 0.6);
  CHECK(t(0, 1) == -0.8);
  CHECK(t(1, 0) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(t(1, 1) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));

  // a gap between events that are not adjacent in truth falls back to the mean
  v.source_index = {0, 2, 3};
  CHECK(oracle_transition_embeddings(v)(0, 0) == doctest::Approx(1 / std::sqrt(2.0)));

  SyntheticVideo one;
  one.captions = EmbeddingMatrix(1, 2, {1, 0});
  CHECK_THROWS_AS(oracle_transition_embeddings(one), Error);
}

TEST_CASE("samples carry hidden ground truth and transition captions") {
  ScenarioSpec spec;
  spec.min_events = spec.max_events = 4;
  spec.transition_fraction = 1.0;
  const auto videos = sparsify_dataset(gen_dataset(spec), {0.5, 3});
  const auto samples = to_samples(videos, true);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(samples[i].ground_truth->size() == 4);
    CHECK(samples[i].caption_segments->size() == 2);
    CHECK(samples[i].synthetic->rows() == 1);
  }
  CHECK_FALSE(to_sample(videos[0], false).synthetic.has_value());
}

TEST_CASE("dataset statistics are reproducible") {
  ScenarioSpec spec;
  spec.min_events = 2;
  spec.max_events = 5;
  const DatasetStats a = dataset_stats(gen_dataset(spec));
  const DatasetStats b = dataset_stats(gen_dataset(spec));
  CHECK(a.mean_events == b.mean_events);
  CHECK(a.annotated_coverage == b.annotated_coverage);
  CHECK(a.videos == 20);
  CHECK(a.min_events >= 2);
  CHECK(a.max_events <= 5);
  CHECK(a.true_coverage > 0.0);
  CHECK(a.true_coverage < 1.0);
}

TEST_CASE("scenario validation") {
  ScenarioSpec spec;
  spec.min_events = 4;
  spec.max_events = 3;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = {};
  spec.noise_sigma = -1;
  CHECK_THROWS_AS(spec.validate(), Error);
  CHECK(parse_layout_mode(to_string(LayoutMode::heterogeneous_durations)) == LayoutMode::heterogeneous_durations);
  CHECK_THROWS_AS(parse_layout_mode("random"), Error);
}
