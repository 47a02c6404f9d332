#include "evloc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "evloc/error.hpp"

namespace evloc {

void Segment::validate() const {
  require(std::isfinite(start) && std::isfinite(end) && start >= 0.0 && start < end && end <= 1.0,
          ErrorKind::InvalidParameter,
          "segment [" + std::to_string(start) + ", " + std::to_string(end) + "] is not inside [0, 1]");
}

std::string_view to_string(Matching matching) {
  return matching == Matching::best_iou ? "best_iou" : "one_to_one";
}

Matching parse_matching(std::string_view text) {
  if (text == "best_iou") return Matching::best_iou;
  if (text == "one_to_one") return Matching::one_to_one;
  throw Error(ErrorKind::InvalidParameter, "unknown matching '" + std::string(text) + "'");
}

Segment mask_to_segment(MaskParams params, std::size_t n_frames) {
  const double start = std::clamp(params.center - 0.5 * params.width, 0.0, 1.0);
  const double end = std::clamp(params.center + 0.5 * params.width, 0.0, 1.0);
  if (end > start) return {start, end};
  const double half = 0.5 / static_cast<double>(std::max<std::size_t>(n_frames, 1));
  const double lo = std::clamp(params.center - half, 0.0, 1.0 - 2.0 * half);
  return {lo, lo + 2.0 * half};
}

std::vector<Segment> masks_to_segments(std::span<const MaskParams> params, std::size_t n_frames) {
  std::vector<Segment> out;
  out.reserve(params.size());
  for (const MaskParams& p : params) out.push_back(mask_to_segment(p, n_frames));
  return out;
}

double temporal_iou(const Segment& a, const Segment& b) {
  const double inter = std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
  const double uni = a.length() + b.length() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<int> max_weight_assignment(std::span<const double> scores, std::size_t rows,
                                       std::size_t cols) {
  require(scores.size() == rows * cols, ErrorKind::ShapeError, "assignment matrix size mismatch");
  // Hungarian algorithm (potentials form) on a square cost matrix of -score.
  const std::size_t n = std::max(rows, cols);
  const auto cost = [&](std::size_t r, std::size_t c) {
    return (r < rows && c < cols) ? -scores[r * cols + c] : 0.0;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> result(rows, -1);
  for (std::size_t j = 1; j <= n; ++j) {
    if (p[j] != 0 && p[j] - 1 < rows && j - 1 < cols) result[p[j] - 1] = static_cast<int>(j - 1);
  }
  return result;
}

LocReport localization_scores(std::span<const Segment> preds, std::span<const Segment> gts,
                              std::span<const double> thresholds, Matching matching) {
  require(!gts.empty(), ErrorKind::EmptyGroundTruth, "localization scores need ground-truth segments");
  require(!thresholds.empty(), ErrorKind::InvalidParameter, "at least one IoU threshold is required");
  const std::size_t np = preds.size();
  const std::size_t ng = gts.size();
  std::vector<double> iou(np * ng);
  for (std::size_t p = 0; p < np; ++p) {
    for (std::size_t g = 0; g < ng; ++g) iou[p * ng + g] = temporal_iou(preds[p], gts[g]);
  }

  // Per-side IoU that is compared against each threshold.
  std::vector<double> gt_score(ng, 0.0), pred_score(np, 0.0);
  if (matching == Matching::best_iou) {
    for (std::size_t p = 0; p < np; ++p) {
      for (std::size_t g = 0; g < ng; ++g) {
        gt_score[g] = std::max(gt_score[g], iou[p * ng + g]);
        pred_score[p] = std::max(pred_score[p], iou[p * ng + g]);
      }
    }
  } else if (np > 0) {
    const std::vector<int> assigned = max_weight_assignment(iou, np, ng);
    for (std::size_t p = 0; p < np; ++p) {
      if (assigned[p] < 0) continue;
      const double s = iou[p * ng + static_cast<std::size_t>(assigned[p])];
      pred_score[p] = s;
      gt_score[static_cast<std::size_t>(assigned[p])] = s;
    }
  }

  LocReport report;
  for (double theta : thresholds) {
    ThresholdScore ts{theta, 0.0, 0.0};
    ts.recall = static_cast<double>(std::count_if(gt_score.begin(), gt_score.end(),
                                                  [&](double s) { return s >= theta; })) /
                static_cast<double>(ng);
    if (np > 0) {
      ts.precision = static_cast<double>(std::count_if(pred_score.begin(), pred_score.end(),
                                                       [&](double s) { return s >= theta; })) /
                     static_cast<double>(np);
    }
    report.recall_avg += ts.recall;
    report.precision_avg += ts.precision;
    report.per_threshold.push_back(ts);
  }
  report.recall_avg /= static_cast<double>(thresholds.size());
  report.precision_avg /= static_cast<double>(thresholds.size());
  const double denom = report.recall_avg + report.precision_avg;
  report.f1 = denom > 0.0 ? 2.0 * report.recall_avg * report.precision_avg / denom : 0.0;
  return report;
}

LocReport aggregate(std::span<const LocReport> per_video) {
  require(!per_video.empty(), ErrorKind::EmptyResult, "no per-video reports to aggregate");
  LocReport out = per_video.front();
  for (auto& ts : out.per_threshold) ts.recall = ts.precision = 0.0;
  for (const LocReport& r : per_video) {
    require(r.per_threshold.size() == out.per_threshold.size(), ErrorKind::ShapeError,
            "reports use different threshold sets");
    for (std::size_t k = 0; k < r.per_threshold.size(); ++k) {
      out.per_threshold[k].recall += r.per_threshold[k].recall;
      out.per_threshold[k].precision += r.per_threshold[k].precision;
    }
  }
  out.recall_avg = out.precision_avg = 0.0;
  const double nv = static_cast<double>(per_video.size());
  for (auto& ts : out.per_threshold) {
    ts.recall /= nv;
    ts.precision /= nv;
    out.recall_avg += ts.recall;
    out.precision_avg += ts.precision;
  }
  out.recall_avg /= static_cast<double>(out.per_threshold.size());
  out.precision_avg /= static_cast<double>(out.per_threshold.size());
  const double denom = out.recall_avg + out.precision_avg;
  out.f1 = denom > 0.0 ? 2.0 * out.recall_avg * out.precision_avg / denom : 0.0;
  return out;
}

double mean_best_iou(std::span<const Segment> preds, std::span<const Segment> gts) {
  require(!gts.empty(), ErrorKind::EmptyGroundTruth, "mean IoU needs ground-truth segments");
  double sum = 0.0;
  for (const Segment& g : gts) {
    double best = 0.0;
    for (const Segment& p : preds) best = std::max(best, temporal_iou(p, g));
    sum += best;
  }
  return sum / static_cast<double>(gts.size());
}

WidthStats width_stats(std::span<const std::vector<MaskParams>> videos) {
  WidthStats stats;
  for (const auto& events : videos) {
    if (events.size() < 2) continue;
    double mean = 0.0;
    for (const MaskParams& p : events) mean += p.width;
    mean /= static_cast<double>(events.size());
    double var = 0.0;
    for (const MaskParams& p : events) var += (p.width - mean) * (p.width - mean);
    stats.per_video_std.push_back(std::sqrt(var / static_cast<double>(events.size())));
  }
  require(!stats.per_video_std.empty(), ErrorKind::EmptyResult,
          "width statistics need at least one video with two or more events");
  double sum = 0.0;
  stats.min = stats.max = stats.per_video_std.front();
  for (double s : stats.per_video_std) {
    sum += s;
    stats.min = std::min(stats.min, s);
    stats.max = std::max(stats.max, s);
  }
  stats.mean = sum / static_cast<double>(stats.per_video_std.size());
  return stats;
}

void write_report_block(const LocReport& report, std::string_view name, std::ostream& out) {
  out << "[" << name << "]\n";
  for (const ThresholdScore& ts : report.per_threshold) {
    out << "recall@" << ts.threshold << "=" << 100.0 * ts.recall << "\n";
    out << "precision@" << ts.threshold << "=" << 100.0 * ts.precision << "\n";
  }
  out << "recall_avg=" << 100.0 * report.recall_avg << "\n";
  out << "precision_avg=" << 100.0 * report.precision_avg << "\n";
  out << "f1=" << 100.0 * report.f1 << "\n\n";
}

void write_report_csv(const LocReport& report, std::ostream& out) {
  out << "threshold,recall,precision,f1\n";
  for (const ThresholdScore& ts : report.per_threshold) {
    out << ts.threshold << "," << 100.0 * ts.recall << "," << 100.0 * ts.precision << ",\n";
  }
  out << "avg," << 100.0 * report.recall_avg << "," << 100.0 * report.precision_avg << ","
      << 100.0 * report.f1 << "\n";
}

void write_width_stats_block(const WidthStats& stats, std::ostream& out) {
  out << "[width_stats]\n";
  out << "videos=" << stats.per_video_std.size() << "\n";
  out << "mean=" << stats.mean << "\n";
  out << "min=" << stats.min << "\n";
  out << "max=" << stats.max << "\n\n";
}

}  // namespace evloc
