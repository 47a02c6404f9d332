// Masked pooling, cosine similarity and the alignment losses.
//
//   sim          hinge max(0, margin - s+ + s-) per event, s- = hardest other
//                caption in the same video; mean over events, then videos.
//   sim_inverse  same hinge on inverse-masked features: positive target is
//                the mean of the other captions, negative is the own caption.
//   aug          1 - cos(inter-mask pooled, transition caption), mean over
//                the N_s - 1 inter masks, then over videos.
//   diversity    mean pairwise cosine between mask weight vectors.
//
// Batch functions average over all B videos; a video that cannot contribute
// to a term (single event for sim_inverse/aug, no transition captions for
// aug) adds 0 but still counts in B.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "evloc/embedding.hpp"
#include "evloc/mask.hpp"

namespace evloc {

enum class PoolingMode { plain_mean, mask_weighted };

std::string_view to_string(PoolingMode mode);
PoolingMode parse_pooling_mode(std::string_view text);

struct PooledEmbedding {
  std::vector<double> vector;
  MaskKind source_mask_kind = MaskKind::gaussian;
};

using PooledSet = std::vector<PooledEmbedding>;

struct LossConfig {
  double margin = 0.1;
  double alpha_aug = 0.25;
  double lambda_div = 0.0;
  PoolingMode pooling = PoolingMode::plain_mean;
  double epsilon = 1e-8;

  void validate() const;
};

struct LossParts {
  double sim = 0.0;
  double sim_inverse = 0.0;
  double aug = 0.0;
  double diversity = 0.0;
};

struct LossBreakdown {
  double sim = 0.0;
  double sim_inverse = 0.0;
  double aug = 0.0;
  double diversity = 0.0;
  double external = 0.0;
  double total = 0.0;

  friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

PooledEmbedding masked_pool(const EmbeddingMatrix& frames, const Mask& mask, PoolingMode mode,
                            double epsilon = 1e-8);

/// Accumulates d(loss)/d(mask weights) into `d_weights` given d(loss)/d(pooled).
void masked_pool_backward(const EmbeddingMatrix& frames, const Mask& mask, PoolingMode mode,
                          double epsilon, std::span<const double> pooled,
                          std::span<const double> d_pooled, std::span<double> d_weights);

double cosine(std::span<const double> a, std::span<const double> b, double epsilon = 1e-8);

/// d_a += scale * d cosine(a, b) / d a
void cosine_backward(std::span<const double> a, std::span<const double> b, double epsilon,
                     double scale, std::span<double> d_a);

// Batch losses. `pooled[b]` and `captions[b]` describe video b.

double sim_loss(std::span<const PooledSet> pooled, std::span<const EmbeddingMatrix> captions,
                double margin, double epsilon = 1e-8);
double sim_loss_inverse(std::span<const PooledSet> inverse_pooled,
                        std::span<const EmbeddingMatrix> captions, double margin,
                        double epsilon = 1e-8);
/// syn_captions[b] == nullopt disables the term for video b.
double aug_loss(std::span<const PooledSet> inter_pooled,
                std::span<const std::optional<EmbeddingMatrix>> syn_captions, double epsilon = 1e-8);
/// Masks of a single video.
double diversity_loss(std::span<const Mask> masks, double epsilon = 1e-8);

/// total = sim + sim_inverse + lambda_div * diversity + alpha_aug * aug + external
LossBreakdown total_loss(const LossParts& parts, const LossConfig& cfg, double external = 0.0);

// Per-video terms. When the gradient output is non-null it must be sized like
// the input and receives d(term)/d(input) added to its current contents.

double video_sim_term(std::span<const PooledEmbedding> pooled, const EmbeddingMatrix& captions,
                      double margin, double epsilon, std::vector<std::vector<double>>* d_pooled);
double video_sim_inverse_term(std::span<const PooledEmbedding> inverse_pooled,
                              const EmbeddingMatrix& captions, double margin, double epsilon,
                              std::vector<std::vector<double>>* d_pooled);
double video_aug_term(std::span<const PooledEmbedding> inter_pooled,
                      const EmbeddingMatrix& syn_captions, double epsilon,
                      std::vector<std::vector<double>>* d_pooled);
double video_diversity_term(std::span<const Mask> masks, double epsilon,
                            std::vector<std::vector<double>>* d_weights);

}  // namespace evloc
