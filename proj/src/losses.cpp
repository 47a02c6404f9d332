#include "evloc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "evloc/error.hpp"
#include "evloc/kernels.hpp"

namespace evloc {
namespace {

double guarded_norm(std::span<const double> v, double epsilon) {
  return std::max(std::sqrt(kernels::dot(v, v)), epsilon);
}

void check_pair_counts(std::size_t pooled_videos, std::size_t caption_videos) {
  require(pooled_videos > 0, ErrorKind::EmptyBatch, "loss evaluated on an empty batch");
  require(pooled_videos == caption_videos, ErrorKind::ShapeError,
          "pooled batch has " + std::to_string(pooled_videos) + " videos but captions have " +
              std::to_string(caption_videos));
}

void check_event_count(std::size_t pooled, const EmbeddingMatrix& captions) {
  require(pooled >= 1, ErrorKind::ShapeError, "video has no pooled events");
  require(pooled == captions.rows(), ErrorKind::ShapeError,
          "pooled count " + std::to_string(pooled) + " != caption count " +
              std::to_string(captions.rows()));
}

void check_dims(std::span<const double> a, std::size_t dim) {
  require(a.size() == dim, ErrorKind::ShapeError,
          "embedding dimension " + std::to_string(a.size()) + " != " + std::to_string(dim));
}

// One hinge max(0, margin - s_pos + s_neg) on a pooled vector. Subgradient is
// zero on the flat side and exactly at the kink.
double hinge(std::span<const double> p, std::span<const double> positive,
             std::span<const double> negative, bool has_negative, double margin, double epsilon,
             double grad_scale, std::span<double> d_p) {
  const double s_pos = cosine(p, positive, epsilon);
  const double s_neg = has_negative ? cosine(p, negative, epsilon) : 0.0;
  const double h = margin - s_pos + s_neg;
  if (h <= 0.0) return 0.0;
  if (!d_p.empty()) {
    cosine_backward(p, positive, epsilon, -grad_scale, d_p);
    if (has_negative) cosine_backward(p, negative, epsilon, grad_scale, d_p);
  }
  return h;
}

std::span<double> grad_slot(std::vector<std::vector<double>>* grads, std::size_t i) {
  if (grads == nullptr) return {};
  return (*grads)[i];
}

}  // namespace

std::string_view to_string(PoolingMode mode) {
  return mode == PoolingMode::plain_mean ? "plain_mean" : "mask_weighted";
}

PoolingMode parse_pooling_mode(std::string_view text) {
  if (text == "plain_mean") return PoolingMode::plain_mean;
  if (text == "mask_weighted") return PoolingMode::mask_weighted;
  throw Error(ErrorKind::InvalidParameter, "unknown pooling mode '" + std::string(text) + "'");
}

void LossConfig::validate() const {
  require(margin >= 0.0 && std::isfinite(margin), ErrorKind::InvalidParameter, "margin must be >= 0");
  require(alpha_aug >= 0.0 && std::isfinite(alpha_aug), ErrorKind::InvalidParameter,
          "alpha_aug must be >= 0");
  require(lambda_div >= 0.0 && std::isfinite(lambda_div), ErrorKind::InvalidParameter,
          "lambda_div must be >= 0");
  require(epsilon > 0.0 && epsilon <= 1e-3, ErrorKind::InvalidParameter,
          "epsilon must lie in (0, 1e-3]");
}

PooledEmbedding masked_pool(const EmbeddingMatrix& frames, const Mask& mask, PoolingMode mode,
                            double epsilon) {
  require(frames.rows() == mask.size(), ErrorKind::ShapeError,
          "mask length " + std::to_string(mask.size()) + " != frame count " +
              std::to_string(frames.rows()));
  require(frames.rows() > 0, ErrorKind::ShapeError, "cannot pool an empty frame matrix");
  PooledEmbedding out{std::vector<double>(frames.dim()), mask.kind};
  kernels::weighted_row_sum(mask.weights, frames.data(), frames.dim(), out.vector);
  double denom = static_cast<double>(frames.rows());
  if (mode == PoolingMode::mask_weighted) {
    double mass = 0.0;
    for (double w : mask.weights) mass += w;
    denom = std::max(mass, epsilon);
  }
  for (double& v : out.vector) v /= denom;
  return out;
}

void masked_pool_backward(const EmbeddingMatrix& frames, const Mask& mask, PoolingMode mode,
                          double epsilon, std::span<const double> pooled,
                          std::span<const double> d_pooled, std::span<double> d_weights) {
  const std::size_t n = frames.rows();
  require(mask.size() == n && d_weights.size() == n, ErrorKind::ShapeError,
          "pool backward: mask/gradient length mismatch");
  std::vector<double> projections(n);
  kernels::row_dots(frames.data(), frames.dim(), d_pooled, projections);
  if (mode == PoolingMode::plain_mean) {
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) d_weights[j] += projections[j] * inv;
    return;
  }
  double mass = 0.0;
  for (double w : mask.weights) mass += w;
  if (mass > epsilon) {
    const double offset = kernels::dot(d_pooled, pooled);
    for (std::size_t j = 0; j < n; ++j) d_weights[j] += (projections[j] - offset) / mass;
  } else {
    for (std::size_t j = 0; j < n; ++j) d_weights[j] += projections[j] / epsilon;
  }
}

double cosine(std::span<const double> a, std::span<const double> b, double epsilon) {
  return kernels::dot(a, b) / (guarded_norm(a, epsilon) * guarded_norm(b, epsilon));
}

void cosine_backward(std::span<const double> a, std::span<const double> b, double epsilon,
                     double scale, std::span<double> d_a) {
  const double raw_a = std::sqrt(kernels::dot(a, a));
  const double na = std::max(raw_a, epsilon);
  const double nb = guarded_norm(b, epsilon);
  kernels::axpy(scale / (na * nb), b, d_a);
  if (raw_a > epsilon) {
    const double dot_ab = kernels::dot(a, b);
    kernels::axpy(-scale * dot_ab / (na * na * na * nb), a, d_a);
  }
}

double video_sim_term(std::span<const PooledEmbedding> pooled, const EmbeddingMatrix& captions,
                      double margin, double epsilon, std::vector<std::vector<double>>* d_pooled) {
  const std::size_t n = pooled.size();
  check_event_count(n, captions);
  const double inv_n = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = pooled[i].vector;
    check_dims(p, captions.dim());
    // hardest other caption; ties keep the lowest index
    std::size_t hardest = n;
    double best = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double s = cosine(p, captions.row(j), epsilon);
      if (hardest == n || s > best) {
        best = s;
        hardest = j;
      }
    }
    const bool has_negative = hardest != n;
    sum += hinge(p, captions.row(i), has_negative ? captions.row(hardest) : captions.row(i),
                 has_negative, margin, epsilon, inv_n, grad_slot(d_pooled, i));
  }
  return sum * inv_n;
}

double video_sim_inverse_term(std::span<const PooledEmbedding> inverse_pooled,
                              const EmbeddingMatrix& captions, double margin, double epsilon,
                              std::vector<std::vector<double>>* d_pooled) {
  const std::size_t n = inverse_pooled.size();
  check_event_count(n, captions);
  if (n < 2) return 0.0;
  const std::size_t dim = captions.dim();
  std::vector<double> total(dim, 0.0);
  for (std::size_t j = 0; j < n; ++j) kernels::axpy(1.0, captions.row(j), total);
  const double inv_n = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  std::vector<double> others(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = inverse_pooled[i].vector;
    check_dims(p, dim);
    const auto own = captions.row(i);
    for (std::size_t d = 0; d < dim; ++d) others[d] = (total[d] - own[d]) / static_cast<double>(n - 1);
    sum += hinge(p, others, own, true, margin, epsilon, inv_n, grad_slot(d_pooled, i));
  }
  return sum * inv_n;
}

double video_aug_term(std::span<const PooledEmbedding> inter_pooled,
                      const EmbeddingMatrix& syn_captions, double epsilon,
                      std::vector<std::vector<double>>* d_pooled) {
  require(inter_pooled.size() == syn_captions.rows(), ErrorKind::ShapeError,
          "inter-mask count " + std::to_string(inter_pooled.size()) +
              " != synthetic caption count " + std::to_string(syn_captions.rows()));
  const std::size_t n = inter_pooled.size();
  if (n == 0) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = inter_pooled[i].vector;
    check_dims(p, syn_captions.dim());
    sum += 1.0 - cosine(p, syn_captions.row(i), epsilon);
    if (d_pooled != nullptr) cosine_backward(p, syn_captions.row(i), epsilon, -inv_n, (*d_pooled)[i]);
  }
  return sum * inv_n;
}

double video_diversity_term(std::span<const Mask> masks, double epsilon,
                            std::vector<std::vector<double>>* d_weights) {
  const std::size_t n = masks.size();
  require(n >= 1, ErrorKind::ShapeError, "diversity loss needs at least one mask");
  for (const Mask& m : masks) {
    require(m.size() == masks[0].size(), ErrorKind::ShapeError, "masks differ in length");
  }
  if (n < 2) return 0.0;
  const double inv_pairs = 2.0 / static_cast<double>(n * (n - 1));
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      sum += cosine(masks[i].weights, masks[j].weights, epsilon);
      if (d_weights != nullptr) {
        cosine_backward(masks[i].weights, masks[j].weights, epsilon, inv_pairs, (*d_weights)[i]);
        cosine_backward(masks[j].weights, masks[i].weights, epsilon, inv_pairs, (*d_weights)[j]);
      }
    }
  }
  return sum * inv_pairs;
}

double sim_loss(std::span<const PooledSet> pooled, std::span<const EmbeddingMatrix> captions,
                double margin, double epsilon) {
  check_pair_counts(pooled.size(), captions.size());
  double sum = 0.0;
  for (std::size_t b = 0; b < pooled.size(); ++b) {
    sum += video_sim_term(pooled[b], captions[b], margin, epsilon, nullptr);
  }
  return sum / static_cast<double>(pooled.size());
}

double sim_loss_inverse(std::span<const PooledSet> inverse_pooled,
                        std::span<const EmbeddingMatrix> captions, double margin, double epsilon) {
  check_pair_counts(inverse_pooled.size(), captions.size());
  double sum = 0.0;
  for (std::size_t b = 0; b < inverse_pooled.size(); ++b) {
    sum += video_sim_inverse_term(inverse_pooled[b], captions[b], margin, epsilon, nullptr);
  }
  return sum / static_cast<double>(inverse_pooled.size());
}

double aug_loss(std::span<const PooledSet> inter_pooled,
                std::span<const std::optional<EmbeddingMatrix>> syn_captions, double epsilon) {
  check_pair_counts(inter_pooled.size(), syn_captions.size());
  double sum = 0.0;
  for (std::size_t b = 0; b < inter_pooled.size(); ++b) {
    if (!syn_captions[b].has_value()) continue;
    sum += video_aug_term(inter_pooled[b], *syn_captions[b], epsilon, nullptr);
  }
  return sum / static_cast<double>(inter_pooled.size());
}

double diversity_loss(std::span<const Mask> masks, double epsilon) {
  return video_diversity_term(masks, epsilon, nullptr);
}

LossBreakdown total_loss(const LossParts& parts, const LossConfig& cfg, double external) {
  const auto check = [](double v, const char* name) {
    require(std::isfinite(v), ErrorKind::NumericalError, std::string("non-finite loss term '") + name + "'");
  };
  check(parts.sim, "sim");
  check(parts.sim_inverse, "sim_inverse");
  check(parts.aug, "aug");
  check(parts.diversity, "diversity");
  check(external, "external");
  LossBreakdown out;
  out.sim = parts.sim;
  out.sim_inverse = parts.sim_inverse;
  out.aug = parts.aug;
  out.diversity = parts.diversity;
  out.external = external;
  out.total = parts.sim + parts.sim_inverse + cfg.lambda_div * parts.diversity +
              cfg.alpha_aug * parts.aug + external;
  check(out.total, "total");
  return out;
}

}  // namespace evloc
