#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mrta/sim.hpp"

namespace mrta {

// feature normalization constants (x, y are already in [0,1])
inline constexpr double kTimeNorm = 550.0;    // deadlines and t_next
inline constexpr double kDemandNorm = 10.0;   // task demand units

struct GraphConfig {
  enum class Norm { l2, l1 };
  Norm norm = Norm::l2;  // metric inside 1/(1+|d_i - d_j|)
};

// shared shape for task and robot graphs
struct NodeGraph {
  Eigen::MatrixXd features;   // N x F, normalized
  Eigen::MatrixXd adjacency;  // N x N, symmetric, diag 1
  Eigen::MatrixXd degree;     // N x N diagonal, row sums of adjacency
};

using TaskGraph = NodeGraph;
using RobotGraph = NodeGraph;

// rows follow scenario task order (all tasks, any status; status enters
// through the residual-demand feature)
TaskGraph build_task_graph(const WorldState& w, const Scenario& s,
                           const GraphConfig& cfg = {});
// rows follow the given task-id subset order
TaskGraph build_task_subgraph(const WorldState& w, const Scenario& s,
                              const std::vector<int>& task_ids,
                              const GraphConfig& cfg = {});

RobotGraph build_robot_graph(const WorldState& w, const Scenario& s,
                             const GraphConfig& cfg = {});
RobotGraph build_robot_subgraph(const WorldState& w, const Scenario& s,
                                const std::vector<int>& robot_indices,
                                const GraphConfig& cfg = {});

}  // namespace mrta
