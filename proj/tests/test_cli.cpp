#include <doctest.h>

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "evloc/dataio.hpp"
#include "evloc/run_config.hpp"
#include "evloc/simulator.hpp"
#include "helpers.hpp"

using namespace evloc;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "evloc");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string small_dataset(const std::string& name, std::vector<std::string> extra = {}) {
  const fs::path dir = testing::scratch_dir(name);
  std::vector<std::string> args{"simulate", "--out-dir", dir.string(), "--n-videos", "4", "--n-frames", "32"};
  args.insert(args.end(), extra.begin(), extra.end());
  const Result r = run(args);
  REQUIRE(r.code == 0);
  return (dir / "manifest.json").string();
}

}  // namespace

TEST_CASE("simulate writes a loadable, reproducible dataset") {
  const fs::path a = testing::scratch_dir("sim_a"), b = testing::scratch_dir("sim_b");
  const Result ra = run({"simulate", "--out-dir", a.string(), "--seed", "5", "--transition-fraction", "1"});
  REQUIRE(ra.code == 0);
  CHECK(ra.out.find("events_per_video_mean=3") != std::string::npos);
  CHECK(ra.out.find("annotated_coverage=") != std::string::npos);
  REQUIRE(run({"simulate", "--out-dir", b.string(), "--seed", "5", "--transition-fraction", "1"}).code == 0);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    ++files;
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
  }
  CHECK(files == 2 + 3 * 20);
  const Dataset ds = load_dataset(a / "manifest.json");
  CHECK(ds.videos.size() == 20);
  CHECK(ds.warnings.empty());
}

TEST_CASE("simulate --keep-ratio hides events but keeps full ground truth") {
  const std::string m = small_dataset("sim_sparse", {"--min-events", "4", "--max-events", "4", "--keep-ratio", "0.25"});
  const Dataset ds = load_dataset(m);
  for (const VideoSample& v : ds.videos) {
    CHECK(v.captions.rows() == 1);
    CHECK(v.ground_truth->size() == 4);
    CHECK_FALSE(v.synthetic.has_value());
  }
}

TEST_CASE("train runs and persists its outputs") {
  const std::string m = small_dataset("train_data", {"--transition-fraction", "1"});
  const fs::path out = testing::scratch_dir("train_out");
  const Result r = run({"train", "--manifest", m, "--out-dir", out.string(), "--steps", "20", "--mask-kind", "cauchy"});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(out / "report.jsonl"));
  CHECK(read_params(out / "params.json").size() == 4);
  const RunConfig saved = read_run_config(out / "run_config.txt");
  CHECK(saved.steps == 20);
  CHECK(saved.mask_kind == MaskKind::cauchy);

  // the saved config reproduces the run
  const fs::path again = testing::scratch_dir("train_again");
  REQUIRE(run({"train", "--manifest", m, "--out-dir", again.string(), "--config", (out / "run_config.txt").string()}).code == 0);
  CHECK(slurp(out / "report.jsonl") == slurp(again / "report.jsonl"));
  CHECK(slurp(out / "params.json") == slurp(again / "params.json"));
}

TEST_CASE("train without synthetic captions and alpha-aug 0") {
  ScenarioSpec spec;
  spec.n_videos = 3;
  spec.n_frames = 16;
  const fs::path dir = testing::scratch_dir("nosyn");
  const auto samples = to_samples(gen_dataset(spec), false);
  const fs::path m = write_dataset(samples, dir);
  CHECK(run({"train", "--manifest", m.string(), "--out-dir", (dir / "o").string(), "--steps", "5", "--alpha-aug", "0"}).code == 0);
}

TEST_CASE("diversity-only training") {
  const std::string m = small_dataset("divonly");
  const fs::path out = testing::scratch_dir("divonly_out");
  REQUIRE(run({"train", "--manifest", m, "--out-dir", out.string(), "--steps", "5", "--lambda-div", "1", "--no-sim"}).code == 0);
  std::ifstream in(out / "report.jsonl");
  std::string first;
  std::getline(in, first);
  CHECK(first.find("\"sim\":0.0") != std::string::npos);
  CHECK(first.find("\"sim_inverse\":0.0") != std::string::npos);
}

TEST_CASE("gradcheck command") {
  const Result r = run({"gradcheck", "--trials", "10"});
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS") != std::string::npos);
  for (const char* term : {"sim ", "sim_inverse", "aug", "diversity", "total"}) CHECK(r.out.find(term) != std::string::npos);
  const Result h = run({"gradcheck", "--trials", "3", "--mask-kind", "hard_binary"});
  CHECK(h.code == 0);
  CHECK(h.out.find("surrogate") != std::string::npos);
}

TEST_CASE("eval scores ground-truth params perfectly") {
  const std::string m = small_dataset("eval_data");
  const Dataset ds = load_dataset(m);
  std::vector<VideoMasks> masks;
  for (const VideoSample& v : ds.videos) {
    VideoMasks vm{v.id, {}};
    for (const Segment& s : *v.caption_segments) vm.events.push_back({s.center(), s.length()});
    masks.push_back(vm);
  }
  const fs::path out = testing::scratch_dir("eval_out");
  write_params(masks, out / "gt_params.json");
  const Result r = run({"eval", "--manifest", m, "--params", (out / "gt_params.json").string(), "--out-dir",
                        out.string(), "--with-baseline"});
  REQUIRE(r.code == 0);
  const std::string report = slurp(out / "eval_report.txt");
  CHECK(report.find("[trained]") != std::string::npos);
  CHECK(report.find("[baseline]") != std::string::npos);
  const auto f1 = report.find("f1=");
  REQUIRE(f1 != std::string::npos);
  CHECK(report.substr(f1, 7) == "f1=100\n");
  CHECK(fs::exists(out / "trained.csv"));
  CHECK(fs::exists(out / "baseline.csv"));

  const Result one = run({"eval", "--manifest", m, "--params", (out / "gt_params.json").string(), "--out-dir",
                          out.string(), "--matching", "one_to_one"});
  CHECK(one.code == 0);
}

TEST_CASE("eval refusals and error exit codes") {
  const std::string m = small_dataset("eval_err");
  const fs::path out = testing::scratch_dir("eval_err_out");
  { std::ofstream(out / "empty.json"); }
  const Result empty = run({"eval", "--manifest", m, "--params", (out / "empty.json").string(), "--out-dir", out.string()});
  CHECK(empty.code == 2);
  CHECK(empty.err.find("FormatError") != std::string::npos);

  ScenarioSpec spec;
  spec.n_videos = 2;
  spec.n_frames = 16;
  auto samples = to_samples(gen_dataset(spec), false);
  for (auto& s : samples) s.ground_truth.reset();
  const fs::path nogt = write_dataset(samples, testing::scratch_dir("nogt"));
  const Result refused = run({"baseline", "--manifest", nogt.string(), "--out-dir", out.string()});
  CHECK(refused.code == 2);
  CHECK(refused.err.find("ground-truth") != std::string::npos);

  // a NaN inside an embedding file is a numerical error
  const fs::path bad = testing::scratch_dir("nan_data");
  const fs::path bm = write_dataset(samples, bad);
  {
    std::fstream f(bad / (samples[0].id + ".frames.emb"), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(20);
    const unsigned char nan_bits[4] = {0x00, 0x00, 0xc0, 0x7f};
    f.write(reinterpret_cast<const char*>(nan_bits), 4);
  }
  CHECK(run({"train", "--manifest", bm.string(), "--out-dir", out.string(), "--steps", "1"}).code == 3);
}

TEST_CASE("flags: unknown rejected, every run-config key documented") {
  CHECK(run({"train", "--manifest", "x", "--out-dir", "y", "--frobnicate"}).code == 2);
  CHECK(run({}).code == 2);
  const Result help = run({"train", "--help"});
  CHECK(help.code == 0);
  for (const std::string& key : run_config_keys()) CHECK(help.out.find("--" + key) != std::string::npos);
  const std::string m = small_dataset("badvalue");
  CHECK(run({"train", "--manifest", m, "--out-dir", "unused", "--pooling", "max"}).code == 2);
}

TEST_CASE("sweep emits a plot-ready table") {
  const fs::path out = testing::scratch_dir("sweep");
  const Result r = run({"sweep", "--out-dir", out.string(), "--n-videos", "2", "--n-frames", "16", "--min-events", "4",
                        "--max-events", "4", "--steps", "5", "--w-inter-grid", "0.3,0.6"});
  REQUIRE(r.code == 0);
  std::ifstream in(out / "sweep.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "grid,value,seed,recall,precision,f1,mean_iou");
  std::size_t keep = 0, winter = 0;
  for (std::string line; std::getline(in, line);) {
    keep += line.rfind("keep_ratio,", 0) == 0;
    winter += line.rfind("w_inter,", 0) == 0;
  }
  CHECK(keep == 4);
  CHECK(winter == 2);
}
