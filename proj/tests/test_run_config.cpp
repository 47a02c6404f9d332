#include <doctest.h>

#include <sstream>

#include "evloc/error.hpp"
#include "evloc/run_config.hpp"

using namespace evloc;

TEST_CASE("defaults") {
  const RunConfig c;
  CHECK(c.temperature == 4.0);
  CHECK(c.margin == 0.1);
  CHECK(c.w_inter == 0.6);
  CHECK(c.alpha_aug == 0.25);
  CHECK(c.lambda_div == 0.0);
  CHECK(c.lr == 1e-4);
  CHECK(c.pooling == PoolingMode::plain_mean);
  CHECK(c.mask_kind == MaskKind::gaussian);
  CHECK(c.batch_size == 8);
  CHECK(c.steps == 3000);
}

TEST_CASE("text round trip") {
  RunConfig c;
  c.temperature = 3.0;
  c.w_inter = 0.45;
  c.lr = 1e-3;
  c.pooling = PoolingMode::mask_weighted;
  c.mask_kind = MaskKind::cauchy;
  c.no_inverse = true;
  c.seed = 99;
  std::ostringstream out;
  write_run_config(c, out);
  const RunConfig back = parse_run_config(out.str());
  CHECK(back.temperature == 3.0);
  CHECK(back.w_inter == 0.45);
  CHECK(back.lr == 1e-3);
  CHECK(back.pooling == PoolingMode::mask_weighted);
  CHECK(back.mask_kind == MaskKind::cauchy);
  CHECK(back.no_inverse);
  CHECK(back.seed == 99);

  std::size_t lines = 0;
  std::istringstream in(out.str());
  for (std::string line; std::getline(in, line); ++lines) {
    CHECK(line.substr(0, line.find('=')) == run_config_keys()[lines]);
  }
  CHECK(lines == run_config_keys().size());
}

TEST_CASE("comments, blanks and errors") {
  const RunConfig c = parse_run_config("# comment\n\nmargin=0.2\n  steps = 10\n");
  CHECK(c.margin == 0.2);
  CHECK(c.steps == 10);
  CHECK_THROWS_AS(parse_run_config("bogus=1\n"), Error);
  CHECK_THROWS_AS(parse_run_config("margin\n"), Error);
  CHECK_THROWS_AS(parse_run_config("lr=fast\n"), Error);
  CHECK_THROWS_AS(parse_run_config("no-sim=maybe\n"), Error);
  RunConfig bad;
  bad.temperature = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("term switches follow the weights and flags") {
  RunConfig c;
  TrainConfig t = c.to_train_config(32);
  CHECK(t.objective.engine.n_frames == 32);
  CHECK(t.objective.terms.sim);
  CHECK(t.objective.terms.sim_inverse);
  CHECK(t.objective.terms.aug);
  CHECK_FALSE(t.objective.terms.diversity);

  c.lambda_div = 1.0;
  c.no_sim = true;
  c.alpha_aug = 0.0;
  t = c.to_train_config(32);
  CHECK_FALSE(t.objective.terms.sim);
  CHECK_FALSE(t.objective.terms.sim_inverse);
  CHECK_FALSE(t.objective.terms.aug);
  CHECK(t.objective.terms.diversity);
  CHECK(t.objective.loss.lambda_div == 1.0);

  c = {};
  c.no_inverse = true;
  t = c.to_train_config(16);
  CHECK(t.objective.terms.sim);
  CHECK_FALSE(t.objective.terms.sim_inverse);
}
