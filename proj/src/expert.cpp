#include "mrta/expert.hpp"

#include <cmath>

namespace mrta {

double expert_weight(int robot, int task_id, const WorldState& w,
                     const Scenario& s, const ExpertConfig& cfg) {
  const RobotState& rb = w.robots.at(robot);
  const TaskSpec& t = s.tasks.at(task_id - 1);
  Point tp{t.x, t.y};
  double d_ri = dist(rb.dest, tp);
  double d_i0 = dist(tp, s.depot);
  double arrival = rb.t_next + d_ri / s.fleet.speed;
  if (arrival > t.deadline) return 0.0;
  double l = rb.range - (d_ri + d_i0);
  return std::max(0.0, l) * std::exp(-arrival / cfg.alpha);
}

WeightFn expert_weight_fn(const Scenario& s, const ExpertConfig& cfg) {
  return [&s, cfg](int robot, int task_id, const WorldState& w) {
    return expert_weight(robot, task_id, w, s, cfg);
  };
}

int BigMrtaAllocator::decide(const WorldState& w, const Scenario& s,
                             int robot) const {
  return mrta::decide(w, s, expert_weight_fn(s, cfg_), robot, sim_cfg_);
}

int FeasRndAllocator::decide(const WorldState& w, const Scenario& s,
                             int robot) const {
  return feas_rnd(w, s, robot, rng_, sim_cfg_);
}

}  // namespace mrta
