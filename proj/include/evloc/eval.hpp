// Localization protocol: masks -> segments, temporal IoU, recall/precision/F1
// averaged over IoU thresholds, and mask-width spread statistics.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "evloc/mask.hpp"
#include "evloc/sample.hpp"

namespace evloc {

inline constexpr double kDefaultThresholds[] = {0.3, 0.5, 0.7, 0.9};

enum class Matching {
  best_iou,    // a prediction may satisfy several ground truths
  one_to_one,  // maximum-total-IoU assignment, each side used at most once
};

std::string_view to_string(Matching matching);
Matching parse_matching(std::string_view text);

struct ThresholdScore {
  double threshold = 0.0;
  double recall = 0.0;
  double precision = 0.0;
};

struct LocReport {
  std::vector<ThresholdScore> per_threshold;
  double recall_avg = 0.0;
  double precision_avg = 0.0;
  double f1 = 0.0;
};

struct WidthStats {
  std::vector<double> per_video_std;  // eligible videos only, in input order
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// [c - w/2, c + w/2] clipped to [0, 1]. A segment that collapses under
/// clipping becomes one frame wide around the center.
Segment mask_to_segment(MaskParams params, std::size_t n_frames);
std::vector<Segment> masks_to_segments(std::span<const MaskParams> params, std::size_t n_frames);

double temporal_iou(const Segment& a, const Segment& b);

LocReport localization_scores(std::span<const Segment> preds, std::span<const Segment> gts,
                              std::span<const double> thresholds = kDefaultThresholds,
                              Matching matching = Matching::best_iou);

/// Averages per-video recall/precision at each threshold; F1 from the averages.
LocReport aggregate(std::span<const LocReport> per_video);

/// Mean over ground truths of the best IoU achieved by any prediction.
double mean_best_iou(std::span<const Segment> preds, std::span<const Segment> gts);

/// Population standard deviation of widths per video (videos with >= 2
/// events), plus corpus mean/min/max. Throws EmptyResult with no eligible video.
WidthStats width_stats(std::span<const std::vector<MaskParams>> videos);

/// Maximum-weight assignment on a rows x cols score matrix; result[r] is the
/// matched column or -1.
std::vector<int> max_weight_assignment(std::span<const double> scores, std::size_t rows,
                                       std::size_t cols);

/// key=value block, values scaled x100 like the reported metrics.
void write_report_block(const LocReport& report, std::string_view name, std::ostream& out);
/// threshold,recall,precision rows followed by an "avg" row carrying F1.
void write_report_csv(const LocReport& report, std::ostream& out);
void write_width_stats_block(const WidthStats& stats, std::ostream& out);

}  // namespace evloc
