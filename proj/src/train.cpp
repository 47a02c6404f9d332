#include "evloc/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <tuple>

#include <json.hpp>

#include "evloc/error.hpp"

namespace evloc {

void TrainConfig::validate() const {
  objective.validate();
  optimizer.validate();
  require(batch_size >= 1, ErrorKind::InvalidParameter, "batch size must be >= 1");
  require(steps >= 1, ErrorKind::InvalidParameter, "steps must be >= 1");
}

TrainReport train(std::span<const VideoSample> dataset, const TrainConfig& cfg,
                  std::optional<ParamSet> init) {
  require(!dataset.empty(), ErrorKind::EmptyDataset, "training dataset is empty");
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();

  ParamSet params = init.has_value() ? std::move(*init) : initial_params(dataset, cfg.objective.engine);
  require(params.n_videos() == dataset.size(), ErrorKind::ShapeError,
          "initial parameters do not match the dataset");
  OptimizerState state(cfg.optimizer, params.values().size());

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();
  const std::size_t batch_size = std::min(cfg.batch_size, dataset.size());

  TrainReport report;
  report.seed = cfg.seed;
  report.history.reserve(cfg.steps);
  Batch batch{dataset, {}};
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    if (cursor >= order.size()) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const std::size_t end = std::min(order.size(), cursor + batch_size);
    batch.indices.assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
    cursor = end;

    LossBreakdown loss;
    GradientSet grads;
    try {
      std::tie(loss, grads) = backward(batch, params, cfg.objective);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NumericalError) throw;
      throw Error(ErrorKind::NumericalError, "step " + std::to_string(step) + ": " + e.what());
    }
    adamw_step(state, grads.values(), params.values());
    for (double v : params.values()) {
      require(std::isfinite(v), ErrorKind::NumericalError,
              "step " + std::to_string(step) + ": parameter became non-finite");
    }
    report.history.push_back(loss);
  }

  report.final_params = constrained_params(params, cfg.objective.engine);
  report.final_raw = std::move(params);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

void write_step_records(const TrainReport& report, std::ostream& out) {
  for (std::size_t step = 0; step < report.history.size(); ++step) {
    const LossBreakdown& l = report.history[step];
    nlohmann::ordered_json record;
    record["step"] = step;
    record["sim"] = l.sim;
    record["sim_inverse"] = l.sim_inverse;
    record["aug"] = l.aug;
    record["diversity"] = l.diversity;
    record["external"] = l.external;
    record["total"] = l.total;
    out << record.dump() << '\n';
  }
}

}  // namespace evloc
