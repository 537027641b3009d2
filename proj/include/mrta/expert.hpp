#pragma once

#include "mrta/matching.hpp"
#include "mrta/sim.hpp"

namespace mrta {

struct ExpertConfig {
  double alpha = 550.0;  // seconds, the mission horizon constant
};

// the expert incentive: omega = max(0, l_r) * exp(-t_arrive / alpha) when the
// robot can arrive by the deadline, else 0, with l_r the range left after
// visiting the task and returning to the depot
double expert_weight(int robot, int task_id, const WorldState& w,
                     const Scenario& s, const ExpertConfig& cfg = {});

// adapter for the bigraph builder
WeightFn expert_weight_fn(const Scenario& s, const ExpertConfig& cfg = {});

// allocator: full bigraph + expert weights + maximum-weight matching
struct BigMrtaAllocator final : Allocator {
  BigMrtaAllocator(ExpertConfig cfg = {}, SimConfig sim_cfg = {})
      : cfg_(cfg), sim_cfg_(sim_cfg) {}
  int decide(const WorldState& w, const Scenario& s, int robot) const override;

 private:
  ExpertConfig cfg_;
  SimConfig sim_cfg_;
};

// allocator: uniformly random feasible action (one instance per episode,
// the rng advances on every decision)
struct FeasRndAllocator final : Allocator {
  explicit FeasRndAllocator(std::uint64_t seed, SimConfig sim_cfg = {})
      : rng_(seed), sim_cfg_(sim_cfg) {}
  int decide(const WorldState& w, const Scenario& s, int robot) const override;

 private:
  mutable Rng rng_;
  SimConfig sim_cfg_;
};

}  // namespace mrta
