#include "commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "evloc/dataio.hpp"
#include "evloc/error.hpp"
#include "evloc/eval.hpp"
#include "evloc/gradcheck.hpp"
#include "evloc/run_config.hpp"
#include "evloc/simulator.hpp"
#include "evloc/train.hpp"

namespace evloc::cli {
namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

const std::map<std::string, std::string>& run_config_help() {
  static const std::map<std::string, std::string> help = {
      {"temperature", "mask temperature tau (> 0)"},
      {"margin", "ranking margin"},
      {"w-inter", "inter-mask width in (0, 1]"},
      {"alpha-aug", "weight of the transition alignment term; 0 disables it"},
      {"lambda-div", "weight of the mask diversity term; 0 disables it"},
      {"pooling", "plain_mean | mask_weighted"},
      {"mask-kind", "gaussian | cauchy | hard_binary"},
      {"lr", "AdamW learning rate"},
      {"batch-size", "videos per step"},
      {"steps", "optimizer steps"},
      {"seed", "shuffle seed"},
      {"no-sim", "disable both ranking terms"},
      {"no-inverse", "disable the inverse-mask ranking term"},
  };
  return help;
}

std::map<std::string, std::string> run_config_defaults() {
  std::ostringstream text;
  write_run_config(RunConfig{}, text);
  std::map<std::string, std::string> out;
  std::istringstream lines(text.str());
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find('=');
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

// RunConfig keys exposed as flags; resolved after parsing so that explicit
// flags override --config.
struct RunConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App* app, bool with_seed = true) {
    app->add_option("--config", config_path, "key=value run configuration file")->check(CLI::ExistingFile);
    const auto defaults = run_config_defaults();
    for (const std::string& key : run_config_keys()) {
      if (!with_seed && key == "seed") continue;
      const std::string desc = run_config_help().at(key) + " [" + defaults.at(key) + "]";
      if (key == "no-sim" || key == "no-inverse") {
        options[key] = app->add_flag("--" + key, switches[key], desc);
      } else {
        options[key] = app->add_option("--" + key, values[key], desc);
      }
    }
  }

  RunConfig resolve() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : read_run_config(config_path);
    for (const auto& [key, opt] : options) {
      if (opt->count() == 0) continue;
      if (switches.count(key)) {
        set_run_config_value(cfg, key, switches.at(key) ? "true" : "false");
      } else {
        set_run_config_value(cfg, key, values.at(key));
      }
    }
    cfg.validate();
    return cfg;
  }
};

struct ScenarioFlags {
  ScenarioSpec spec;
  std::string layout = "non_uniform";
  double keep_ratio = 1.0;

  void attach(CLI::App* app, bool with_seed) {
    app->add_option("--n-videos", spec.n_videos, "videos to generate")->capture_default_str();
    app->add_option("--n-frames", spec.n_frames, "frames per video")->capture_default_str();
    app->add_option("--embed-dim", spec.embed_dim, "embedding dimension")->capture_default_str();
    app->add_option("--min-events", spec.min_events, "fewest events per video")->capture_default_str();
    app->add_option("--max-events", spec.max_events, "most events per video")->capture_default_str();
    app->add_option("--layout", layout, "uniform | non_uniform | heterogeneous_durations")->capture_default_str();
    app->add_option("--noise-sigma", spec.noise_sigma, "frame noise standard deviation")->capture_default_str();
    app->add_option("--transition-fraction", spec.transition_fraction,
                    "probability that a gap gets its own transition prototype")
        ->capture_default_str();
    if (with_seed) app->add_option("--seed", spec.seed, "generator seed")->capture_default_str();
  }

  ScenarioSpec resolve() const {
    ScenarioSpec out = spec;
    out.layout = parse_layout_mode(layout);
    out.validate();
    return out;
  }
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::IoError, "cannot write " + path.string());
  f << text;
  require(static_cast<bool>(f), ErrorKind::IoError, "write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

Dataset load_with_warnings(const std::string& manifest, std::ostream& err) {
  Dataset ds = load_dataset(manifest);
  for (const std::string& w : ds.warnings) err << "warning: " << w << "\n";
  return ds;
}

std::vector<VideoMasks> to_video_masks(std::span<const VideoSample> videos,
                                       const std::vector<std::vector<MaskParams>>& params) {
  std::vector<VideoMasks> out;
  for (std::size_t v = 0; v < videos.size(); ++v) out.push_back({videos[v].id, params[v]});
  return out;
}

std::vector<std::vector<MaskParams>> baseline_params(std::span<const VideoSample> videos) {
  std::vector<std::vector<MaskParams>> out;
  for (const VideoSample& v : videos) out.push_back(fixed_uniform_params(v.n_events()));
  return out;
}

// Matches params to videos by id; every video needs exactly one entry with
// one mask per caption.
std::vector<std::vector<MaskParams>> align_params(std::span<const VideoSample> videos,
                                                  const std::vector<VideoMasks>& masks) {
  std::map<std::string, const VideoMasks*> by_id;
  for (const VideoMasks& m : masks) by_id[m.id] = &m;
  std::vector<std::vector<MaskParams>> out;
  for (const VideoSample& v : videos) {
    auto it = by_id.find(v.id);
    require(it != by_id.end(), ErrorKind::SchemaError, "params file has no entry for video '" + v.id + "'");
    require(it->second->events.size() == v.n_events(), ErrorKind::SchemaError,
            "params for video '" + v.id + "' have " + std::to_string(it->second->events.size()) +
                " masks, expected " + std::to_string(v.n_events()));
    out.push_back(it->second->events);
  }
  return out;
}

struct Scores {
  LocReport report;
  double mean_iou = 0.0;
};

Scores score(std::span<const VideoSample> videos, const std::vector<std::vector<MaskParams>>& params,
             std::size_t n_frames, Matching matching) {
  std::vector<LocReport> per_video;
  Scores s;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    require(videos[v].ground_truth.has_value(), ErrorKind::EmptyGroundTruth,
            "video '" + videos[v].id + "' has no ground-truth segments; evaluation needs them");
    const auto preds = masks_to_segments(params[v], n_frames);
    per_video.push_back(localization_scores(preds, *videos[v].ground_truth, kDefaultThresholds, matching));
    s.mean_iou += mean_best_iou(preds, *videos[v].ground_truth);
  }
  s.report = aggregate(per_video);
  s.mean_iou /= static_cast<double>(videos.size());
  return s;
}

void require_ground_truth(const Dataset& ds) {
  require(ds.has_ground_truth(), ErrorKind::EmptyGroundTruth,
          "manifest lacks ground-truth segments for some videos; refusing to evaluate");
}

std::optional<WidthStats> try_width_stats(const std::vector<std::vector<MaskParams>>& params) {
  try {
    return width_stats(params);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EmptyResult) throw;
    return std::nullopt;
  }
}

void write_eval_outputs(const fs::path& dir, const std::string& name, const Scores& s,
                        const std::vector<std::vector<MaskParams>>& params, std::ostream& text) {
  write_report_block(s.report, name, text);
  text << "[" << name << "_iou]\nmean_best_iou=" << s.mean_iou << "\n\n";
  if (auto ws = try_width_stats(params)) {
    std::ostringstream block;
    write_width_stats_block(*ws, block);
    std::string b = block.str();
    b.replace(1, std::string("width_stats").size(), name + "_width_stats");
    text << b;
  }
  std::ostringstream csv;
  write_report_csv(s.report, csv);
  write_file(dir / (name + ".csv"), csv.str());
}

void print_scores(std::ostream& out, const std::string& name, const Scores& s) {
  out << name << ": recall " << fmt("%.2f", 100 * s.report.recall_avg) << " precision "
      << fmt("%.2f", 100 * s.report.precision_avg) << " F1 " << fmt("%.2f", 100 * s.report.f1)
      << " mean IoU " << fmt("%.4f", s.mean_iou) << "\n";
}

// ---- simulate ----

struct SimulateArgs {
  ScenarioFlags scenario;
  std::string out_dir;
};

int do_simulate(const SimulateArgs& a, std::ostream& out) {
  const ScenarioSpec spec = a.scenario.resolve();
  auto videos = gen_dataset(spec);
  if (a.scenario.keep_ratio < 1.0) videos = sparsify_dataset(videos, {a.scenario.keep_ratio, spec.seed});
  const auto samples = to_samples(videos, true);
  const fs::path manifest = write_dataset(samples, a.out_dir);
  const DatasetStats st = dataset_stats(videos);
  std::ostringstream s;
  s << "videos=" << st.videos << "\n"
    << "events_per_video_mean=" << st.mean_events << "\n"
    << "events_per_video_min=" << st.min_events << "\n"
    << "events_per_video_max=" << st.max_events << "\n"
    << "true_events_per_video_mean=" << st.mean_true_events << "\n"
    << "annotated_coverage=" << st.annotated_coverage << "\n"
    << "true_coverage=" << st.true_coverage << "\n";
  write_file(fs::path(a.out_dir) / "dataset_stats.txt", s.str());
  out << "wrote " << manifest.string() << "\n" << s.str();
  return kExitOk;
}

// ---- train ----

struct TrainArgs {
  RunConfigFlags run;
  std::string manifest;
  std::string out_dir;
};

int do_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig rc = a.run.resolve();
  const Dataset ds = load_with_warnings(a.manifest, err);
  const TrainConfig tc = rc.to_train_config(ds.manifest.n_frames);
  const TrainReport report = train(ds.videos, tc);
  const fs::path dir = a.out_dir;
  ensure_dir(dir);
  std::ostringstream records;
  write_step_records(report, records);
  write_file(dir / "report.jsonl", records.str());
  write_params(to_video_masks(ds.videos, report.final_params), dir / "params.json");
  std::ostringstream cfg_text;
  write_run_config(rc, cfg_text);
  write_file(dir / "run_config.txt", cfg_text.str());
  const LossBreakdown& first = report.history.front();
  const LossBreakdown& last = report.history.back();
  out << "steps=" << report.history.size() << " initial_total=" << first.total << " final_total=" << last.total
      << " seconds=" << fmt("%.2f", report.wall_seconds) << "\n";
  out << "wrote " << (dir / "params.json").string() << "\n";
  return kExitOk;
}

// ---- gradcheck ----

struct GradcheckArgs {
  GradcheckConfig cfg;
  std::string mask_kind = "gaussian";
  std::string out_dir;
};

int do_gradcheck(GradcheckArgs a, std::ostream& out) {
  a.cfg.kind = parse_mask_kind(a.mask_kind);
  const GradcheckReport report = run_gradcheck(a.cfg);
  std::ostringstream text;
  write_gradcheck_report(report, a.cfg.tolerance, text);
  out << text.str();
  if (!a.out_dir.empty()) {
    ensure_dir(a.out_dir);
    write_file(fs::path(a.out_dir) / "gradcheck.txt", text.str());
  }
  return report.passed() ? kExitOk : kExitNumerical;
}

// ---- eval / baseline ----

struct EvalArgs {
  std::string manifest;
  std::string params;
  std::string out_dir;
  std::string matching = "best_iou";
  bool with_baseline = false;
};

int do_eval(const EvalArgs& a, bool baseline_only, std::ostream& out, std::ostream& err) {
  const Matching matching = parse_matching(a.matching);
  const Dataset ds = load_with_warnings(a.manifest, err);
  require_ground_truth(ds);
  const fs::path dir = a.out_dir;
  ensure_dir(dir);
  std::ostringstream text;
  text << "[eval]\nmatching=" << to_string(matching) << "\nvideos=" << ds.videos.size() << "\n\n";
  const std::size_t n_frames = ds.manifest.n_frames;
  if (!baseline_only) {
    const auto params = align_params(ds.videos, read_params(a.params));
    const Scores s = score(ds.videos, params, n_frames, matching);
    write_eval_outputs(dir, "trained", s, params, text);
    print_scores(out, "trained", s);
  }
  if (baseline_only || a.with_baseline) {
    const auto params = baseline_params(ds.videos);
    const Scores s = score(ds.videos, params, n_frames, matching);
    write_eval_outputs(dir, "baseline", s, params, text);
    print_scores(out, "baseline", s);
    if (baseline_only) write_params(to_video_masks(ds.videos, params), dir / "baseline_params.json");
  }
  write_file(dir / (baseline_only ? "baseline_report.txt" : "eval_report.txt"), text.str());
  return kExitOk;
}

// ---- sweep ----

struct SweepArgs {
  ScenarioFlags scenario;
  RunConfigFlags run;
  std::vector<double> keep_ratios = {0.25, 0.5, 0.75, 1.0};
  std::vector<double> w_inters = {0.2, 0.4, 0.6, 0.8, 1.0};
  std::size_t seeds = 1;
  std::uint64_t seed = 0;
  std::string out_dir;
};

struct SweepRow {
  std::string grid;
  double value;
  std::uint64_t seed;
  Scores scores;
};

int do_sweep(const SweepArgs& a, std::ostream& out) {
  require(a.seeds >= 1, ErrorKind::InvalidParameter, "--seeds must be at least 1");
  const RunConfig base_rc = a.run.resolve();
  const ScenarioSpec base_spec = a.scenario.resolve();
  std::vector<SweepRow> rows;
  auto run_point = [&](const std::string& grid, double value, std::uint64_t seed, double keep, double w_inter) {
    ScenarioSpec spec = base_spec;
    spec.seed = seed;
    auto videos = gen_dataset(spec);
    if (keep < 1.0) videos = sparsify_dataset(videos, {keep, seed});
    const auto samples = to_samples(videos, true);
    RunConfig rc = base_rc;
    rc.seed = seed;
    rc.w_inter = w_inter;
    const TrainReport report = train(samples, rc.to_train_config(spec.n_frames));
    rows.push_back({grid, value, seed, score(samples, report.final_params, spec.n_frames, Matching::best_iou)});
    out << grid << "=" << value << " seed=" << seed << " F1=" << fmt("%.2f", 100 * rows.back().scores.report.f1)
        << "\n";
  };
  for (std::uint64_t s = 0; s < a.seeds; ++s) {
    for (double keep : a.keep_ratios) run_point("keep_ratio", keep, a.seed + s, keep, base_rc.w_inter);
    for (double w : a.w_inters) run_point("w_inter", w, a.seed + s, 1.0, w);
  }
  std::ostringstream csv;
  csv << "grid,value,seed,recall,precision,f1,mean_iou\n";
  for (const SweepRow& r : rows) {
    csv << r.grid << "," << r.value << "," << r.seed << "," << 100 * r.scores.report.recall_avg << ","
        << 100 * r.scores.report.precision_avg << "," << 100 * r.scores.report.f1 << "," << r.scores.mean_iou
        << "\n";
  }
  ensure_dir(a.out_dir);
  write_file(fs::path(a.out_dir) / "sweep.csv", csv.str());
  out << "wrote " << (fs::path(a.out_dir) / "sweep.csv").string() << "\n";
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event localization with learnable temporal masks"};
  app.name("evloc");
  app.require_subcommand(1, 1);

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  sim.scenario.attach(c_sim, true);
  c_sim->add_option("--keep-ratio", sim.scenario.keep_ratio, "fraction of events kept as annotations")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  c_sim->add_option("--out-dir", sim.out_dir, "output directory")->required();

  TrainArgs tr;
  CLI::App* c_train = app.add_subcommand("train", "train mask parameters on a dataset");
  c_train->add_option("--manifest", tr.manifest, "dataset manifest")->required()->check(CLI::ExistingFile);
  c_train->add_option("--out-dir", tr.out_dir, "output directory")->required();
  tr.run.attach(c_train);

  GradcheckArgs gc;
  CLI::App* c_gc = app.add_subcommand("gradcheck", "compare analytic and finite-difference gradients");
  c_gc->add_option("--trials", gc.cfg.trials, "randomized instances")->capture_default_str();
  c_gc->add_option("--seed", gc.cfg.seed, "instance seed")->capture_default_str();
  c_gc->add_option("--mask-kind", gc.mask_kind, "gaussian | cauchy | hard_binary")->capture_default_str();
  c_gc->add_option("--temperature", gc.cfg.temperature, "mask temperature")->capture_default_str();
  c_gc->add_option("--tolerance", gc.cfg.tolerance, "max relative error")->capture_default_str();
  c_gc->add_option("--out-dir", gc.out_dir, "optional directory for gradcheck.txt");

  EvalArgs ev;
  CLI::App* c_eval = app.add_subcommand("eval", "score trained params against ground truth");
  c_eval->add_option("--manifest", ev.manifest, "dataset manifest")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--params", ev.params, "params file written by train")->required();
  c_eval->add_option("--out-dir", ev.out_dir, "output directory")->required();
  c_eval->add_option("--matching", ev.matching, "best_iou | one_to_one")->capture_default_str();
  c_eval->add_flag("--with-baseline", ev.with_baseline, "also score the fixed-uniform masks");

  EvalArgs bl;
  CLI::App* c_base = app.add_subcommand("baseline", "score the fixed-uniform masks");
  c_base->add_option("--manifest", bl.manifest, "dataset manifest")->required()->check(CLI::ExistingFile);
  c_base->add_option("--out-dir", bl.out_dir, "output directory")->required();
  c_base->add_option("--matching", bl.matching, "best_iou | one_to_one")->capture_default_str();

  SweepArgs sw;
  CLI::App* c_sweep = app.add_subcommand("sweep", "keep-ratio and w_inter grids on simulated data");
  sw.scenario.attach(c_sweep, false);
  sw.run.attach(c_sweep, false);
  c_sweep->add_option("--seed", sw.seed, "first seed (scenario and training)")->capture_default_str();
  c_sweep->add_option("--seeds", sw.seeds, "number of consecutive seeds")->capture_default_str();
  c_sweep->add_option("--keep-ratios", sw.keep_ratios, "keep-ratio grid")->delimiter(',')->capture_default_str();
  c_sweep->add_option("--w-inter-grid", sw.w_inters, "w_inter grid")->delimiter(',')->capture_default_str();
  c_sweep->add_option("--out-dir", sw.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*c_sim) return do_simulate(sim, out);
    if (*c_train) return do_train(tr, out, err);
    if (*c_gc) return do_gradcheck(gc, out);
    if (*c_eval) return do_eval(ev, false, out, err);
    if (*c_base) return do_eval(bl, true, out, err);
    if (*c_sweep) return do_sweep(sw, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::NumericalError ? kExitNumerical : kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace evloc::cli
