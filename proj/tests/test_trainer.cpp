#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>

#include "doctest.h"
#include "mrta/trainer.hpp"

using namespace mrta;

namespace {

PolicyHyper small_hyper() {
  PolicyHyper hy;
  hy.h = 8;
  hy.P = 2;
  hy.K = 2;
  hy.L_e = 1;
  hy.n_heads = 2;
  return hy;
}

ScenarioStream tiny_stream() {
  return [](std::uint64_t seed) { return generate(10, 2, seed); };
}

TrainConfig tiny_cfg() {
  TrainConfig cfg;
  cfg.population = 4;
  cfg.elites = 2;
  cfg.generations = 2;
  cfg.scenarios_per_eval = 2;
  cfg.heldout_scenarios = 2;
  cfg.seed = 12;
  return cfg;
}

// the trainer's pinned held-out seed schedule
std::vector<Scenario> heldout_batch(const TrainConfig& cfg,
                                    const ScenarioStream& stream) {
  std::vector<Scenario> out;
  for (int i = 0; i < cfg.heldout_scenarios; ++i)
    out.push_back(stream(derive_seed(cfg.seed, (1ull << 40) + i)));
  return out;
}

}  // namespace

TEST_CASE("evaluate: bounds, determinism, jobs invariance") {
  PolicyParams p = init_params(small_hyper(), 3);
  std::vector<Scenario> batch;
  for (std::uint64_t k = 0; k < 4; ++k)
    batch.push_back(generate(10, 2, derive_seed(3100, k)));

  double a = evaluate(p, batch);
  CHECK(a >= 0.0);
  CHECK(a <= 2.0);  // loose-capacity rewards can pass 1, never the visit bound
  CHECK(evaluate(p, batch) == a);
  CHECK(evaluate(p, batch, 3) == a);
  CHECK_THROWS_AS(evaluate(p, {}), ContractError);
}

TEST_CASE("evaluate scores degenerate parameters as zero instead of throwing") {
  PolicyParams p = init_params(small_hyper(), 3);
  Eigen::VectorXd v = flatten(p);
  v(0) = std::numeric_limits<double>::quiet_NaN();
  PolicyParams broken = unflatten(v, small_hyper());
  std::vector<Scenario> batch = {generate(10, 2, 1)};
  CHECK(evaluate(broken, batch) == 0.0);
}

TEST_CASE("train validates its configuration") {
  PolicyParams p = init_params(small_hyper(), 1);
  TrainConfig cfg = tiny_cfg();
  cfg.elites = 5;  // > population
  CHECK_THROWS_AS(train(p, cfg, tiny_stream()), ContractError);
  cfg = tiny_cfg();
  cfg.population = 0;
  CHECK_THROWS_AS(train(p, cfg, tiny_stream()), ContractError);
  cfg = tiny_cfg();
  cfg.noise = 0.0;
  CHECK_THROWS_AS(train(p, cfg, tiny_stream()), ContractError);
}

TEST_CASE("zero generations returns the initial parameters untouched") {
  PolicyParams p = init_params(small_hyper(), 9);
  TrainConfig cfg = tiny_cfg();
  cfg.generations = 0;
  auto [out, log] = train(p, cfg, tiny_stream());
  CHECK(log.rows.empty());
  CHECK((flatten(out).array() == flatten(p).array()).all());
}

TEST_CASE("training is deterministic apart from wall time") {
  PolicyParams p = init_params(small_hyper(), 21);
  TrainConfig cfg = tiny_cfg();
  auto [out_a, log_a] = train(p, cfg, tiny_stream());
  auto [out_b, log_b] = train(p, cfg, tiny_stream());
  CHECK((flatten(out_a).array() == flatten(out_b).array()).all());
  REQUIRE(log_a.rows.size() == 2);
  REQUIRE(log_b.rows.size() == 2);
  for (std::size_t g = 0; g < log_a.rows.size(); ++g) {
    CHECK(log_a.rows[g].generation == static_cast<int>(g));
    CHECK(log_a.rows[g].best == log_b.rows[g].best);
    CHECK(log_a.rows[g].mean == log_b.rows[g].mean);
    CHECK(log_a.rows[g].std_dev == log_b.rows[g].std_dev);
    CHECK(log_a.rows[g].param_norm == log_b.rows[g].param_norm);
    CHECK(log_a.rows[g].best >= log_a.rows[g].mean);
    CHECK(log_a.rows[g].std_dev >= 0.0);
    CHECK(log_a.rows[g].param_norm > 0.0);
  }

  // more workers change timing only
  cfg.jobs = 3;
  auto [out_c, log_c] = train(p, cfg, tiny_stream());
  CHECK((flatten(out_c).array() == flatten(out_a).array()).all());
  for (std::size_t g = 0; g < log_a.rows.size(); ++g)
    CHECK(log_c.rows[g].mean == log_a.rows[g].mean);
}

TEST_CASE("returned parameters never score below the initial on the held-out set") {
  PolicyParams p = init_params(small_hyper(), 33);
  TrainConfig cfg = tiny_cfg();
  cfg.generations = 3;
  auto [out, log] = train(p, cfg, tiny_stream());
  std::vector<Scenario> held = heldout_batch(cfg, tiny_stream());
  CHECK(evaluate(out, held) >= evaluate(p, held));
}

TEST_CASE("checkpoints land on the requested cadence and load back") {
  PolicyParams p = init_params(small_hyper(), 55);
  TrainConfig cfg = tiny_cfg();
  cfg.checkpoint_every = 1;
  cfg.checkpoint_prefix = "ckpt_test";
  train(p, cfg, tiny_stream());
  for (int g : {1, 2}) {
    std::string path = "ckpt_test_gen" + std::to_string(g) + ".params";
    PolicyParams loaded = load_params(path);
    CHECK(loaded.hyper.h == 8);
    std::remove(path.c_str());
  }
  // cadence 2 writes only the final generation
  cfg.checkpoint_every = 2;
  train(p, cfg, tiny_stream());
  CHECK_THROWS_AS(load_params("ckpt_test_gen1.params"), IoError);
  PolicyParams loaded = load_params("ckpt_test_gen2.params");
  CHECK(loaded.hyper.P == 2);
  std::remove("ckpt_test_gen2.params");
}

TEST_CASE("train log serializes with the pinned header") {
  TrainLog log;
  GenRecord r;
  r.generation = 0;
  r.best = 0.5;
  r.mean = 0.25;
  r.std_dev = 0.1;
  r.elapsed_s = 1.5;
  r.param_norm = 2.0;
  log.rows.push_back(r);
  std::string csv = train_log_to_csv(log);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "generation,best,mean,std,elapsed_s,param_norm");
  std::getline(in, line);
  CHECK(line == "0,0.5,0.25,0.10000000000000001,1.5,2");
  CHECK(train_log_to_csv(TrainLog{}) ==
        "generation,best,mean,std,elapsed_s,param_norm\n");
}
