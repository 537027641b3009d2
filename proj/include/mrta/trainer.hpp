#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mrta/policy.hpp"
#include "mrta/scenario.hpp"

namespace mrta {

struct TrainConfig {
  int population = 16;        // lambda, perturbed candidates per generation
  int elites = 4;             // mu_sel, recombined by mean
  double noise = 0.05;        // perturbation scale
  int generations = 100;
  int scenarios_per_eval = 8;  // fresh batch per generation, shared by candidates
  std::uint64_t seed = 0;
  bool antithetic = true;
  int jobs = 1;
  int heldout_scenarios = 16;  // internal held-out set for best-seen tracking
  int checkpoint_every = 0;    // 0 disables checkpoints
  std::string checkpoint_prefix;
};

struct GenRecord {
  int generation = 0;
  double best = 0.0;   // best candidate score on the generation's batch
  double mean = 0.0;
  double std_dev = 0.0;
  double elapsed_s = 0.0;  // wall time, excluded from determinism claims
  double param_norm = 0.0;
};

struct TrainLog {
  std::vector<GenRecord> rows;
};

// maps a derived seed to a scenario; the trainer owns seed derivation so
// candidates within a generation share identical batches
using ScenarioStream = std::function<Scenario(std::uint64_t seed)>;

// mean episode reward of the test-mode (greedy) learned allocator
double evaluate(const PolicyParams& params, const std::vector<Scenario>& scenarios,
                int jobs = 1);

std::pair<PolicyParams, TrainLog> train(const PolicyParams& initial,
                                        const TrainConfig& cfg,
                                        const ScenarioStream& stream);

std::string train_log_to_csv(const TrainLog& log);

}  // namespace mrta
