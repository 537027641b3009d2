#include "mrta/graphs.hpp"

namespace mrta {

namespace {

NodeGraph from_features(Eigen::MatrixXd f, const GraphConfig& cfg) {
  NodeGraph g;
  const Eigen::Index n = f.rows();
  g.adjacency.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g.adjacency(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      Eigen::VectorXd d = f.row(i) - f.row(j);
      double nm = cfg.norm == GraphConfig::Norm::l2 ? d.norm() : d.lpNorm<1>();
      double w = 1.0 / (1.0 + nm);
      g.adjacency(i, j) = w;
      g.adjacency(j, i) = w;
    }
  }
  g.degree = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    g.degree(i, i) = g.adjacency.row(i).sum();
  g.features = std::move(f);
  return g;
}

}  // namespace

TaskGraph build_task_subgraph(const WorldState& w, const Scenario& s,
                              const std::vector<int>& task_ids,
                              const GraphConfig& cfg) {
  Eigen::MatrixXd f(static_cast<Eigen::Index>(task_ids.size()), 4);
  for (std::size_t k = 0; k < task_ids.size(); ++k) {
    int id = task_ids[k];
    if (id < 1 || id > static_cast<int>(s.tasks.size()))
      throw ContractError("build_task_subgraph: task id out of range");
    const TaskSpec& t = s.tasks[id - 1];
    f(k, 0) = t.x;
    f(k, 1) = t.y;
    f(k, 2) = t.deadline / kTimeNorm;
    f(k, 3) = w.tasks[id - 1].residual / kDemandNorm;
  }
  return from_features(std::move(f), cfg);
}

TaskGraph build_task_graph(const WorldState& w, const Scenario& s,
                           const GraphConfig& cfg) {
  std::vector<int> ids(s.tasks.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i) + 1;
  return build_task_subgraph(w, s, ids, cfg);
}

RobotGraph build_robot_subgraph(const WorldState& w, const Scenario& s,
                                const std::vector<int>& robot_indices,
                                const GraphConfig& cfg) {
  Eigen::MatrixXd f(static_cast<Eigen::Index>(robot_indices.size()), 5);
  for (std::size_t k = 0; k < robot_indices.size(); ++k) {
    int r = robot_indices[k];
    if (r < 0 || r >= static_cast<int>(w.robots.size()))
      throw ContractError("build_robot_subgraph: robot index out of range");
    const RobotState& rb = w.robots[r];
    f(k, 0) = rb.dest.x;
    f(k, 1) = rb.dest.y;
    f(k, 2) = rb.range / s.fleet.max_range;
    f(k, 3) = static_cast<double>(rb.capacity) / s.fleet.max_capacity;
    f(k, 4) = rb.t_next / kTimeNorm;
  }
  return from_features(std::move(f), cfg);
}

RobotGraph build_robot_graph(const WorldState& w, const Scenario& s,
                             const GraphConfig& cfg) {
  std::vector<int> idx(w.robots.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  return build_robot_subgraph(w, s, idx, cfg);
}

}  // namespace mrta
