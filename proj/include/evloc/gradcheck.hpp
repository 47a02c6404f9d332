// Randomized comparison of backward() against central finite differences,
// one loss term at a time and all terms together.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "evloc/mask.hpp"

namespace evloc {

struct GradcheckConfig {
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  MaskKind kind = MaskKind::gaussian;
  double temperature = 4.0;
  double h = 1e-5;
  double tolerance = 1e-4;
  std::size_t max_videos = 2;
  std::size_t max_events = 5;
  std::size_t max_frames = 32;
  std::size_t max_dim = 8;

  void validate() const;
};

struct TermCheck {
  std::string term;  // sim, sim_inverse, aug, diversity, total
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  bool passed = false;
};

struct GradcheckReport {
  std::vector<TermCheck> terms;
  MaskKind requested = MaskKind::gaussian;
  /// Kind whose forward pass was differentiated. hard_binary has no useful
  /// derivative, so its gaussian surrogate is checked instead.
  MaskKind checked = MaskKind::gaussian;
  std::size_t trials = 0;

  bool passed() const;
};

/// |a - b| / max(|a|, |b|, 1e-8)
double relative_error(double a, double b);

GradcheckReport run_gradcheck(const GradcheckConfig& cfg);

/// One line per term plus a final PASS/FAIL line.
void write_gradcheck_report(const GradcheckReport& report, double tolerance, std::ostream& out);

}  // namespace evloc
