#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "mrta/rng.hpp"
#include "mrta/sim.hpp"

namespace mrta {

struct WeightedBigraph {
  Eigen::MatrixXd weights;  // N^R x N^T, meaningful only where mask is true
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask;
  // index maps back to the full problem (rows may be a shrunk subset)
  std::vector<int> robot_ids;  // world robot indices per row
  std::vector<int> task_ids;   // task ids (1-based) per column
};

struct Matching {
  std::vector<std::pair<int, int>> pairs;  // (row, col) into the bigraph
  double objective = 0.0;
};

using WeightFn = std::function<double(int robot, int task_id, const WorldState&)>;

// full bigraph: every robot row, every task column, mask from sim feasibility
WeightedBigraph build_bigraph(const WorldState& w, const Scenario& s,
                              const WeightFn& fn, const SimConfig& cfg = {});

// bigraph over explicit subsets with a precomputed weight matrix whose rows /
// columns follow the subset order (the learned-policy path)
WeightedBigraph bigraph_from_matrix(const WorldState& w, const Scenario& s,
                                    const std::vector<int>& robot_indices,
                                    const std::vector<int>& task_ids,
                                    const Eigen::MatrixXd& weights,
                                    const SimConfig& cfg = {});

// exact maximum-weight matching, unmatched vertices allowed; ties broken by
// the lexicographically smallest (robot, task) pair sequence, where shorter
// prefixes order first
Matching hungarian_max(const WeightedBigraph& bg);

// the deciding robot's matched task id, or 0 when unmatched
int action_for(const WeightedBigraph& bg, const Matching& m, int robot_index);

// build (full) bigraph with weight_fn, match, return deciding robot's action
int decide(const WorldState& w, const Scenario& s, const WeightFn& fn,
           int deciding_robot, const SimConfig& cfg = {});

// uniformly random feasible task, depot when none
int feas_rnd(const WorldState& w, const Scenario& s, int deciding_robot,
             Rng& rng, const SimConfig& cfg = {});

}  // namespace mrta
