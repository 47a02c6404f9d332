#include "evloc/objective.hpp"

#include <cmath>
#include <string>

#include "evloc/error.hpp"

namespace evloc {
namespace {

using Grads = std::vector<std::vector<double>>;

Grads zeros(std::size_t n, std::size_t len) { return Grads(n, std::vector<double>(len, 0.0)); }

void check_finite(double value, const char* term) {
  require(std::isfinite(value), ErrorKind::NumericalError,
          std::string("non-finite value in term '") + term + "'");
}

void check_finite(const Grads& grads, const char* term) {
  for (const auto& g : grads) {
    for (double v : g) check_finite(v, term);
  }
}

void scale(Grads& grads, double factor) {
  for (auto& g : grads) {
    for (double& v : g) v *= factor;
  }
}

double project(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
  return acc;
}

void check_video(const VideoSample& video, const EngineConfig& engine) {
  require(video.frames.rows() == engine.n_frames, ErrorKind::ShapeError,
          "video '" + video.id + "' has " + std::to_string(video.frames.rows()) +
              " frames, engine expects " + std::to_string(engine.n_frames));
  require(video.captions.rows() >= 1, ErrorKind::ShapeError, "video '" + video.id + "' has no captions");
  require(video.captions.dim() == video.frames.dim(), ErrorKind::ShapeError,
          "video '" + video.id + "' caption/frame dimension mismatch");
}

struct VideoResult {
  LossParts parts;
  std::vector<double> d_center;  // d(weighted per-video contribution)/d center_i
  std::vector<double> d_width;
};

// Evaluates one video's terms. Gradients are of
// sim + sim_inverse + lambda * diversity + alpha * aug, already multiplied by
// `batch_scale`.
VideoResult evaluate_video(const VideoSample& video, std::span<const MaskParams> events,
                           const ObjectiveConfig& cfg, bool want_grad, double batch_scale) {
  const std::size_t n = events.size();
  const std::size_t frames = cfg.engine.n_frames;
  const double eps = cfg.loss.epsilon;
  const PoolingMode mode = cfg.loss.pooling;

  VideoResult out;
  out.d_center.assign(n, 0.0);
  out.d_width.assign(n, 0.0);

  std::vector<Mask> masks;
  masks.reserve(n);
  for (const MaskParams& p : events) masks.push_back(make_mask(cfg.kind, p, cfg.engine));
  Grads d_masks = zeros(n, frames);

  const auto pool_all = [&](const std::vector<Mask>& ms) {
    PooledSet pooled;
    pooled.reserve(ms.size());
    for (const Mask& m : ms) pooled.push_back(masked_pool(video.frames, m, mode, eps));
    return pooled;
  };
  const auto pool_back = [&](const std::vector<Mask>& ms, const PooledSet& pooled, const Grads& d_pooled,
                             Grads& d_weights) {
    for (std::size_t i = 0; i < ms.size(); ++i) {
      masked_pool_backward(video.frames, ms[i], mode, eps, pooled[i].vector, d_pooled[i], d_weights[i]);
    }
  };

  if (cfg.terms.sim) {
    const PooledSet pooled = pool_all(masks);
    Grads d_pooled = zeros(n, video.frames.dim());
    out.parts.sim = video_sim_term(pooled, video.captions, cfg.loss.margin, eps,
                                   want_grad ? &d_pooled : nullptr);
    check_finite(out.parts.sim, "sim");
    if (want_grad) {
      scale(d_pooled, batch_scale);
      check_finite(d_pooled, "sim");
      pool_back(masks, pooled, d_pooled, d_masks);
    }
  }

  if (cfg.terms.sim_inverse && n >= 2) {
    std::vector<Mask> inverse;
    inverse.reserve(n);
    for (const Mask& m : masks) inverse.push_back(inverse_mask(m));
    const PooledSet pooled = pool_all(inverse);
    Grads d_pooled = zeros(n, video.frames.dim());
    out.parts.sim_inverse = video_sim_inverse_term(pooled, video.captions, cfg.loss.margin, eps,
                                                   want_grad ? &d_pooled : nullptr);
    check_finite(out.parts.sim_inverse, "sim_inverse");
    if (want_grad) {
      scale(d_pooled, batch_scale);
      check_finite(d_pooled, "sim_inverse");
      Grads d_inverse = zeros(n, frames);
      pool_back(inverse, pooled, d_pooled, d_inverse);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < frames; ++j) d_masks[i][j] -= d_inverse[i][j];
      }
    }
  }

  if (cfg.terms.aug && n >= 2 && video.synthetic.has_value()) {
    const std::vector<MaskParams> inter = inter_mask_params(events, cfg.w_inter);
    std::vector<Mask> inter_masks;
    inter_masks.reserve(inter.size());
    for (const MaskParams& p : inter) inter_masks.push_back(make_mask(cfg.kind, p, cfg.engine));
    const PooledSet pooled = pool_all(inter_masks);
    Grads d_pooled = zeros(inter.size(), video.frames.dim());
    out.parts.aug = video_aug_term(pooled, *video.synthetic, eps, want_grad ? &d_pooled : nullptr);
    check_finite(out.parts.aug, "aug");
    if (want_grad && cfg.loss.alpha_aug != 0.0) {
      scale(d_pooled, batch_scale * cfg.loss.alpha_aug);
      check_finite(d_pooled, "aug");
      Grads d_inter = zeros(inter.size(), frames);
      pool_back(inter_masks, pooled, d_pooled, d_inter);
      for (std::size_t k = 0; k < inter.size(); ++k) {
        const MaskDerivatives deriv = mask_derivatives(cfg.kind, inter[k], cfg.engine);
        const double d_inter_center = project(d_inter[k], deriv.d_center);
        out.d_center[k] += 0.5 * d_inter_center;
        out.d_center[k + 1] += 0.5 * d_inter_center;
      }
    }
  }

  if (cfg.terms.diversity) {
    Grads d_weights = zeros(n, frames);
    out.parts.diversity = video_diversity_term(masks, eps, want_grad ? &d_weights : nullptr);
    check_finite(out.parts.diversity, "diversity");
    if (want_grad && cfg.loss.lambda_div != 0.0) {
      scale(d_weights, batch_scale * cfg.loss.lambda_div);
      check_finite(d_weights, "diversity");
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < frames; ++j) d_masks[i][j] += d_weights[i][j];
      }
    }
  }

  if (want_grad) {
    for (std::size_t i = 0; i < n; ++i) {
      const MaskDerivatives deriv = mask_derivatives(cfg.kind, events[i], cfg.engine);
      out.d_center[i] += project(d_masks[i], deriv.d_center);
      out.d_width[i] += project(d_masks[i], deriv.d_width);
    }
  }
  return out;
}

LossBreakdown run(const Batch& batch, const ParamSet& params, const ObjectiveConfig& cfg,
                  GradientSet* grads) {
  require(!batch.indices.empty(), ErrorKind::EmptyBatch, "objective evaluated on an empty batch");
  require(params.n_videos() == batch.videos.size(), ErrorKind::ShapeError,
          "parameter table covers " + std::to_string(params.n_videos()) + " videos, dataset has " +
              std::to_string(batch.videos.size()));
  const double batch_scale = 1.0 / static_cast<double>(batch.indices.size());
  LossParts sum;
  for (std::size_t b : batch.indices) {
    require(b < batch.videos.size(), ErrorKind::ShapeError, "batch index out of range");
    const VideoSample& video = batch.videos[b];
    check_video(video, cfg.engine);
    const std::size_t n = video.n_events();
    require(params.n_events(b) == n, ErrorKind::ShapeError,
            "video '" + video.id + "' has " + std::to_string(n) + " captions but " +
                std::to_string(params.n_events(b)) + " parameter pairs");
    std::vector<MaskParams> events(n);
    for (std::size_t i = 0; i < n; ++i) events[i] = constrain(params.get(b, i), cfg.engine);

    const VideoResult r = evaluate_video(video, events, cfg, grads != nullptr, batch_scale);
    sum.sim += r.parts.sim;
    sum.sim_inverse += r.parts.sim_inverse;
    sum.aug += r.parts.aug;
    sum.diversity += r.parts.diversity;

    if (grads != nullptr) {
      for (std::size_t i = 0; i < n; ++i) {
        const ConstrainJacobian jac = constrain_jacobian(params.get(b, i), cfg.engine);
        const double gc = r.d_center[i] * jac.d_center_d_raw;
        const double gw = r.d_width[i] * jac.d_width_d_raw;
        check_finite(gc, "center gradient");
        check_finite(gw, "width gradient");
        grads->add(b, i, gc, gw);
      }
    }
  }
  sum.sim *= batch_scale;
  sum.sim_inverse *= batch_scale;
  sum.aug *= batch_scale;
  sum.diversity *= batch_scale;
  return total_loss(sum, cfg.loss, cfg.external);
}

}  // namespace

EventTable::EventTable(std::span<const std::size_t> events_per_video) {
  offsets_.reserve(events_per_video.size() + 1);
  offsets_.push_back(0);
  for (std::size_t n : events_per_video) offsets_.push_back(offsets_.back() + n);
  values_.assign(2 * offsets_.back(), 0.0);
}

std::size_t EventTable::index(std::size_t video, std::size_t event) const {
  require(video < n_videos() && event < n_events(video), ErrorKind::ShapeError,
          "event table index out of range");
  return 2 * (offsets_[video] + event);
}

RawMaskParams EventTable::get(std::size_t video, std::size_t event) const {
  const std::size_t k = index(video, event);
  return {values_[k], values_[k + 1]};
}

void EventTable::set(std::size_t video, std::size_t event, RawMaskParams value) {
  const std::size_t k = index(video, event);
  values_[k] = value.raw_center;
  values_[k + 1] = value.raw_width;
}

void EventTable::add(std::size_t video, std::size_t event, double d_center, double d_width) {
  const std::size_t k = index(video, event);
  values_[k] += d_center;
  values_[k + 1] += d_width;
}

void ObjectiveConfig::validate() const {
  engine.validate();
  loss.validate();
  require(w_inter > 0.0 && std::isfinite(w_inter), ErrorKind::InvalidParameter, "w_inter must be positive");
  require(std::isfinite(external), ErrorKind::InvalidParameter, "external loss must be finite");
}

Batch Batch::all(std::span<const VideoSample> videos) {
  Batch batch{videos, {}};
  batch.indices.resize(videos.size());
  for (std::size_t i = 0; i < videos.size(); ++i) batch.indices[i] = i;
  return batch;
}

ParamSet initial_params(std::span<const VideoSample> videos, const EngineConfig& cfg) {
  std::vector<std::size_t> counts;
  counts.reserve(videos.size());
  for (const VideoSample& v : videos) counts.push_back(v.n_events());
  ParamSet params(counts);
  // A single-event video tiles with width 1; logit needs width < width_max.
  const double width_cap = cfg.width_max * (1.0 - 1e-3);
  for (std::size_t b = 0; b < videos.size(); ++b) {
    const std::vector<MaskParams> uniform = fixed_uniform_params(counts[b]);
    for (std::size_t i = 0; i < uniform.size(); ++i) {
      MaskParams p = uniform[i];
      p.width = std::min(p.width, width_cap);
      params.set(b, i, unconstrain(p, cfg));
    }
  }
  return params;
}

std::vector<std::vector<MaskParams>> constrained_params(const ParamSet& params,
                                                        const EngineConfig& cfg) {
  std::vector<std::vector<MaskParams>> out(params.n_videos());
  for (std::size_t b = 0; b < params.n_videos(); ++b) {
    out[b].reserve(params.n_events(b));
    for (std::size_t i = 0; i < params.n_events(b); ++i) out[b].push_back(constrain(params.get(b, i), cfg));
  }
  return out;
}

LossBreakdown forward(const Batch& batch, const ParamSet& params, const ObjectiveConfig& cfg) {
  return run(batch, params, cfg, nullptr);
}

std::pair<LossBreakdown, GradientSet> backward(const Batch& batch, const ParamSet& params,
                                               const ObjectiveConfig& cfg) {
  GradientSet grads;
  static_cast<EventTable&>(grads) = static_cast<const EventTable&>(params);
  for (double& v : grads.values()) v = 0.0;
  LossBreakdown loss = run(batch, params, cfg, &grads);
  return {loss, std::move(grads)};
}

GradientSet finite_diff_grad(const std::function<double(const ParamSet&)>& loss_fn,
                             const ParamSet& params, double h) {
  require(h > 0.0 && std::isfinite(h), ErrorKind::InvalidParameter, "finite-difference step must be positive");
  GradientSet grads;
  static_cast<EventTable&>(grads) = static_cast<const EventTable&>(params);
  ParamSet probe = params;
  auto x = probe.values();
  auto g = grads.values();
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double original = x[k];
    x[k] = original + h;
    const double plus = loss_fn(probe);
    x[k] = original - h;
    const double minus = loss_fn(probe);
    x[k] = original;
    g[k] = (plus - minus) / (2.0 * h);
  }
  return grads;
}

}  // namespace evloc
