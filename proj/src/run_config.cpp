#include "evloc/run_config.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "evloc/error.hpp"

namespace evloc {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const std::string text(value);
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::InvalidParameter, "'" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
}

std::uint64_t to_unsigned(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  require(ec == std::errc() && ptr == value.data() + value.size(), ErrorKind::InvalidParameter,
          "'" + std::string(key) + "' expects a non-negative integer, got '" + std::string(value) + "'");
  return v;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw Error(ErrorKind::InvalidParameter, "'" + std::string(key) + "' expects true/false");
}

}  // namespace

void RunConfig::validate() const { to_train_config(2).validate(); }

TrainConfig RunConfig::to_train_config(std::size_t n_frames) const {
  TrainConfig t;
  t.objective.engine.temperature = temperature;
  t.objective.engine.n_frames = n_frames;
  t.objective.loss.margin = margin;
  t.objective.loss.alpha_aug = alpha_aug;
  t.objective.loss.lambda_div = lambda_div;
  t.objective.loss.pooling = pooling;
  t.objective.kind = mask_kind;
  t.objective.w_inter = w_inter;
  t.objective.terms.sim = !no_sim;
  t.objective.terms.sim_inverse = !no_sim && !no_inverse;
  t.objective.terms.aug = alpha_aug > 0.0;
  t.objective.terms.diversity = lambda_div > 0.0;
  t.optimizer.lr = lr;
  t.batch_size = batch_size;
  t.steps = steps;
  t.seed = seed;
  return t;
}

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys{
      "temperature", "margin", "w-inter", "alpha-aug", "lambda-div", "pooling", "mask-kind",
      "lr",          "batch-size", "steps", "seed",     "no-sim",     "no-inverse"};
  return keys;
}

void set_run_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "temperature") cfg.temperature = to_double(key, value);
  else if (key == "margin") cfg.margin = to_double(key, value);
  else if (key == "w-inter") cfg.w_inter = to_double(key, value);
  else if (key == "alpha-aug") cfg.alpha_aug = to_double(key, value);
  else if (key == "lambda-div") cfg.lambda_div = to_double(key, value);
  else if (key == "pooling") cfg.pooling = parse_pooling_mode(value);
  else if (key == "mask-kind") cfg.mask_kind = parse_mask_kind(value);
  else if (key == "lr") cfg.lr = to_double(key, value);
  else if (key == "batch-size") cfg.batch_size = to_unsigned(key, value);
  else if (key == "steps") cfg.steps = to_unsigned(key, value);
  else if (key == "seed") cfg.seed = to_unsigned(key, value);
  else if (key == "no-sim") cfg.no_sim = to_bool(key, value);
  else if (key == "no-inverse") cfg.no_inverse = to_bool(key, value);
  else throw Error(ErrorKind::InvalidParameter, "unknown run-config key '" + std::string(key) + "'");
}

RunConfig parse_run_config(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    require(eq != std::string_view::npos, ErrorKind::InvalidParameter,
            "run config line " + std::to_string(line_no) + " is not key=value");
    set_run_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

RunConfig read_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::IoError, "cannot open run config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str(), base);
}

void write_run_config(const RunConfig& cfg, std::ostream& out) {
  const auto put = [&](const char* key, auto value) { out << key << "=" << value << "\n"; };
  // shortest text that parses back to the same double
  const auto real = [&](const char* key, double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    put(key, std::string_view(buf, res.ptr - buf));
  };
  real("temperature", cfg.temperature);
  real("margin", cfg.margin);
  real("w-inter", cfg.w_inter);
  real("alpha-aug", cfg.alpha_aug);
  real("lambda-div", cfg.lambda_div);
  put("pooling", to_string(cfg.pooling));
  put("mask-kind", to_string(cfg.mask_kind));
  real("lr", cfg.lr);
  put("batch-size", cfg.batch_size);
  put("steps", cfg.steps);
  put("seed", cfg.seed);
  put("no-sim", cfg.no_sim ? "true" : "false");
  put("no-inverse", cfg.no_inverse ? "true" : "false");
}

}  // namespace evloc
