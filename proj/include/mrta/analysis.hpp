#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mrta/expert.hpp"
#include "mrta/policy.hpp"
#include "mrta/scenario.hpp"
#include "mrta/sim.hpp"

namespace mrta {

inline constexpr const char* kMethodBigCam = "big-cam";
inline constexpr const char* kMethodBigMrta = "big-mrta";
inline constexpr const char* kMethodFeasRnd = "feas-rnd";

struct BenchOptions {
  std::string params_path;  // required when big-cam is requested
  ExpertConfig expert;
  BigCamConfig cam;
  SimConfig sim;
  GenerateConfig gen;
  int jobs = 1;
};

struct BenchResult {
  std::string method;
  int s_t = 1, s_r = 1;
  std::vector<std::uint64_t> scenario_seeds;
  std::vector<std::uint64_t> scenario_hashes;  // proves methods share the set
  std::vector<double> rates;                 // completion rate per scenario
  std::vector<double> episode_decision_time;  // seconds, summed per episode
  std::vector<double> mean_decision_time;     // seconds per decision
  double mean = 0.0, median = 0.0, std_dev = 0.0;  // of rates, sample std
};

// all methods run on the identical scenario set derived from base_seed
std::vector<BenchResult> bench(const std::vector<std::string>& methods, int s_t,
                               int s_r, int n_scenarios, std::uint64_t base_seed,
                               const BenchOptions& opt = {});

std::string bench_results_to_csv(const std::vector<BenchResult>& results);

struct WelchResult {
  double t = 0.0;
  double p = 1.0;
  bool degenerate = false;  // both variances zero
};

// two-sided unequal-variance t-test, Welch-Satterthwaite degrees of freedom
WelchResult welch_t(const std::vector<double>& a, const std::vector<double>& b);

// debiased entropic OT divergence with the 0/1 ground cost over a shared
// support; inputs are L1-normalized; kernel K = q*11^T + (1-q)*I with
// q = exp(-1/reg) keeps each iteration O(n); the self-transport terms are
// subtracted so d(x,x) = 0, and the result is clamped into [0,1]
double sinkhorn_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                         double reg = 0.1, int iters = 200);
// matrix convenience: flattens both (same shape required)
double sinkhorn_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         double reg = 0.1, int iters = 200);

// a decision instant frozen for weight-matrix comparisons
struct StateSample {
  Scenario scenario;
  WorldState world;
  int decider = 0;
};

// states drawn from seeded Feas-Rnd episodes on 50-task/6-robot scenarios,
// keeping only instants whose bigraph has at least one feasible edge
std::vector<StateSample> sample_states(int n_states, std::uint64_t base_seed,
                                       const SimConfig& cfg = {});

struct CheckpointEntry {
  std::string label;
  const PolicyParams* params = nullptr;  // null compares the expert to itself
};

struct WeightComparison {
  std::string checkpoint;
  int n_states = 0;
  std::vector<double> distances;
  double mean_distance = 0.0;
  double elapsed_s = 0.0;  // steady-clock time spent on this checkpoint
};

std::vector<WeightComparison> checkpoint_divergence(
    const std::vector<CheckpointEntry>& checkpoints,
    const std::vector<StateSample>& states, double reg = 0.1, int iters = 200,
    const ExpertConfig& expert = {}, const SimConfig& sim = {});

std::string comparison_to_csv(const std::vector<WeightComparison>& rows);

}  // namespace mrta
