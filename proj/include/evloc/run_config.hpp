// Flat key=value run configuration. Every key is also a CLI flag
// (`w-inter=0.6` <-> `--w-inter 0.6`).

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "evloc/losses.hpp"
#include "evloc/mask.hpp"
#include "evloc/train.hpp"

namespace evloc {

struct RunConfig {
  double temperature = 4.0;
  double margin = 0.1;
  double w_inter = 0.6;
  double alpha_aug = 0.25;
  double lambda_div = 0.0;
  PoolingMode pooling = PoolingMode::plain_mean;
  MaskKind mask_kind = MaskKind::gaussian;
  double lr = 1e-4;
  std::size_t batch_size = 8;
  std::size_t steps = 3000;
  std::uint64_t seed = 0;
  bool no_sim = false;      // disables sim and sim_inverse
  bool no_inverse = false;  // disables sim_inverse only

  void validate() const;
  TrainConfig to_train_config(std::size_t n_frames) const;
};

/// Names of every recognised key, in file order.
const std::vector<std::string>& run_config_keys();

/// Sets one key; throws InvalidParameter for unknown keys or bad values.
void set_run_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

/// Parses key=value lines; blank lines and lines starting with '#' are skipped.
RunConfig parse_run_config(std::string_view text, RunConfig base = {});
RunConfig read_run_config(const std::filesystem::path& path, RunConfig base = {});
void write_run_config(const RunConfig& cfg, std::ostream& out);

}  // namespace evloc
