#include "evloc/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "evloc/error.hpp"
#include "evloc/objective.hpp"
#include "evloc/simulator.hpp"

namespace evloc {
namespace {

struct Instance {
  std::vector<VideoSample> videos;
  ParamSet params;
  std::size_t n_frames = 0;
};

EmbeddingMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  EmbeddingMatrix m(rows, dim);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

Instance random_instance(const GradcheckConfig& cfg, std::uint64_t trial) {
  std::mt19937_64 rng(derive_seed(cfg.seed, trial));
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  Instance inst;
  const std::size_t n_videos = pick(1, cfg.max_videos);
  inst.n_frames = pick(4, cfg.max_frames);
  const std::size_t dim = pick(2, cfg.max_dim);
  std::vector<std::size_t> counts;
  for (std::size_t v = 0; v < n_videos; ++v) {
    VideoSample s;
    s.id = "trial" + std::to_string(trial) + "_" + std::to_string(v);
    const std::size_t n_events = pick(1, cfg.max_events);
    s.frames = random_matrix(rng, inst.n_frames, dim);
    s.captions = random_matrix(rng, n_events, dim);
    if (n_events >= 2) s.synthetic = random_matrix(rng, n_events - 1, dim);
    counts.push_back(n_events);
    inst.videos.push_back(std::move(s));
  }
  inst.params = ParamSet(counts);
  std::uniform_real_distribution<double> raw(-1.5, 1.5);
  for (double& x : inst.params.values()) x = raw(rng);
  return inst;
}

ObjectiveConfig term_config(const GradcheckConfig& cfg, std::size_t n_frames, const std::string& term) {
  ObjectiveConfig oc;
  oc.engine.temperature = cfg.temperature;
  oc.engine.n_frames = n_frames;
  oc.kind = cfg.kind == MaskKind::hard_binary ? MaskKind::gaussian : cfg.kind;
  oc.loss.lambda_div = 0.5;
  const bool all = term == "total";
  oc.terms.sim = all || term == "sim";
  oc.terms.sim_inverse = all || term == "sim_inverse";
  oc.terms.aug = all || term == "aug";
  oc.terms.diversity = all || term == "diversity";
  return oc;
}

}  // namespace

void GradcheckConfig::validate() const {
  require(trials >= 1, ErrorKind::InvalidParameter, "gradcheck needs at least one trial");
  require(h > 0.0 && std::isfinite(h), ErrorKind::InvalidParameter, "finite-difference step must be positive");
  require(tolerance > 0.0, ErrorKind::InvalidParameter, "tolerance must be positive");
  require(max_videos >= 1 && max_events >= 1 && max_frames >= 4 && max_dim >= 2,
          ErrorKind::InvalidParameter, "instance size limits too small");
}

bool GradcheckReport::passed() const {
  return !terms.empty() && std::all_of(terms.begin(), terms.end(), [](const TermCheck& t) { return t.passed; });
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

GradcheckReport run_gradcheck(const GradcheckConfig& cfg) {
  cfg.validate();
  GradcheckReport report;
  report.requested = cfg.kind;
  report.checked = cfg.kind == MaskKind::hard_binary ? MaskKind::gaussian : cfg.kind;
  report.trials = cfg.trials;
  for (const char* name : {"sim", "sim_inverse", "aug", "diversity", "total"}) {
    report.terms.push_back({name, 0.0, 0, true});
  }
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const Instance inst = random_instance(cfg, t);
    const Batch batch = Batch::all(inst.videos);
    for (TermCheck& check : report.terms) {
      const ObjectiveConfig oc = term_config(cfg, inst.n_frames, check.term);
      const GradientSet analytic = backward(batch, inst.params, oc).second;
      const GradientSet numeric = finite_diff_grad(
          [&](const ParamSet& p) { return forward(batch, p, oc).total; }, inst.params, cfg.h);
      const auto a = analytic.values();
      const auto b = numeric.values();
      for (std::size_t k = 0; k < a.size(); ++k) {
        check.max_rel_error = std::max(check.max_rel_error, relative_error(a[k], b[k]));
      }
      check.coordinates += a.size();
    }
  }
  for (TermCheck& check : report.terms) check.passed = check.max_rel_error <= cfg.tolerance;
  return report;
}

void write_gradcheck_report(const GradcheckReport& report, double tolerance, std::ostream& out) {
  const bool surrogate = report.requested != report.checked;
  out << "mask_kind=" << to_string(report.requested);
  if (surrogate) out << " (surrogate path only: forward and backward use " << to_string(report.checked) << ")";
  out << "\ntrials=" << report.trials << " tolerance=" << tolerance << "\n";
  char line[128];
  for (const TermCheck& t : report.terms) {
    std::snprintf(line, sizeof line, "%-12s max_rel_err=%.3e coords=%zu %s\n", t.term.c_str(),
                  t.max_rel_error, t.coordinates, t.passed ? "ok" : "FAIL");
    out << line;
  }
  out << (report.passed() ? "PASS" : "FAIL") << "\n";
}

}  // namespace evloc
