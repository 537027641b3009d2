#include "mrta/sim.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "json.hpp"

namespace mrta {

WorldState init(const Scenario& s) {
  WorldState w;
  w.clock = 0.0;
  w.robots.resize(s.fleet.n_robots);
  for (int r = 0; r < s.fleet.n_robots; ++r) {
    RobotState& rb = w.robots[r];
    rb.dest = s.depot;
    rb.range = s.fleet.max_range;
    rb.capacity = s.fleet.max_capacity;
    // strict ordering of first decisions
    rb.t_next = static_cast<double>(r) * 1e-6;
    rb.at_depot = true;
  }
  w.tasks.resize(s.tasks.size());
  for (std::size_t i = 0; i < s.tasks.size(); ++i)
    w.tasks[i].residual = s.tasks[i].demand;
  return w;
}

int try_next_decider(const WorldState& w) {
  int best = -1;
  for (int r = 0; r < static_cast<int>(w.robots.size()); ++r) {
    if (w.robots[r].parked) continue;
    if (best < 0 || w.robots[r].t_next < w.robots[best].t_next) best = r;
  }
  return best;
}

int next_decider(const WorldState& w) {
  int r = try_next_decider(w);
  if (r < 0) throw ContractError("next_decider: all robots retired");
  return r;
}

namespace {

Point task_point(const Scenario& s, int task_id) {
  return {s.tasks[task_id - 1].x, s.tasks[task_id - 1].y};
}

void sweep_expired(WorldState& w, const Scenario& s) {
  for (std::size_t i = 0; i < w.tasks.size(); ++i) {
    TaskState& ts = w.tasks[i];
    if (ts.status == TaskStatus::active && s.tasks[i].deadline < w.clock)
      ts.status = TaskStatus::expired;
  }
}

// wake only after a task arrival: a parked robot's own feasibility never
// grows, so the only reason to rejoin is that the matching may reassign,
// and that needs a commitment/residual change. Waking on every advance lets
// two parked-but-unmatched robots wake each other forever at a frozen clock.
void refresh_parked(WorldState& w, const Scenario& s, bool wake,
                    const SimConfig& cfg) {
  for (int r = 0; r < static_cast<int>(w.robots.size()); ++r) {
    RobotState& rb = w.robots[r];
    if (!rb.parked) continue;
    rb.t_next = w.clock;
    if (wake && !feasibility(w, s, r, cfg).empty()) rb.parked = false;
  }
}

}  // namespace

void advance_to_decision(WorldState& w, const Scenario& s, int robot,
                         const SimConfig& cfg) {
  RobotState& rb = w.robots.at(robot);
  if (rb.parked) throw ContractError("advance: robot is parked");
  if (rb.t_next < w.clock - 1e-12)
    throw ContractError("advance: clock would move backwards");
  w.clock = std::max(w.clock, rb.t_next);
  const bool task_arrival = rb.pending_action > 0;
  if (rb.pending_action > 0) {
    TaskState& ts = w.tasks.at(rb.pending_action - 1);
    ts.committed -= rb.pledge;
    if (ts.status == TaskStatus::active) {
      int delivered = std::min(ts.residual, rb.capacity);
      ts.residual -= delivered;
      rb.capacity -= delivered;
      ts.delivered_total += delivered;
      if (ts.residual == 0) {
        ts.status = TaskStatus::completed;
        ts.completion_time = w.clock;
      }
    }
  } else if (rb.pending_action == 0) {
    rb.range = s.fleet.max_range;
    rb.capacity = s.fleet.max_capacity;
    rb.at_depot = true;
  }
  rb.pending_action = -1;
  rb.pledge = 0;
  sweep_expired(w, s);
  refresh_parked(w, s, task_arrival, cfg);
}

std::vector<int> feasibility(const WorldState& w, const Scenario& s, int robot,
                             const SimConfig& cfg) {
  const RobotState& rb = w.robots.at(robot);
  std::vector<int> out;
  if (rb.capacity < 1) return out;
  for (std::size_t i = 0; i < w.tasks.size(); ++i) {
    const TaskState& ts = w.tasks[i];
    if (ts.status != TaskStatus::active) continue;
    int uncommitted = ts.residual - ts.committed;
    if (uncommitted <= 0) continue;
    if (cfg.strict_capacity_pruning && rb.capacity < uncommitted) continue;
    Point tp = task_point(s, static_cast<int>(i) + 1);
    double d_ri = dist(rb.dest, tp);
    double d_i0 = dist(tp, s.depot);
    if (rb.range < d_ri + d_i0) continue;
    double arrival = rb.t_next + d_ri / s.fleet.speed;
    if (arrival > s.tasks[i].deadline) continue;
    out.push_back(static_cast<int>(i) + 1);
  }
  return out;
}

double apply(WorldState& w, const Scenario& s, int robot, int action,
             const SimConfig& cfg) {
  RobotState& rb = w.robots.at(robot);
  if (rb.pending_action != -1)
    throw ContractError("apply: robot is not at a decision instant");
  double reward = 0.0;
  double d = 0.0;
  if (action == 0) {
    if (rb.at_depot)
      throw ContractError("apply: depot self-loop while at depot");
    d = dist(rb.dest, s.depot);
    rb.dest = s.depot;
    rb.pending_action = 0;
  } else {
    auto feas = feasibility(w, s, robot, cfg);
    if (!std::binary_search(feas.begin(), feas.end(), action))
      throw ContractError("apply: infeasible action " + std::to_string(action) +
                          " for robot " + std::to_string(robot));
    TaskState& ts = w.tasks[action - 1];
    Point tp = task_point(s, action);
    d = dist(rb.dest, tp);
    rb.dest = tp;
    rb.pledge = std::min(ts.residual - ts.committed, rb.capacity);
    ts.committed += rb.pledge;
    rb.pending_action = action;
    w.n_task_visits += 1;
    w.reward_accum =
        static_cast<double>(w.n_task_visits) / static_cast<double>(w.tasks.size());
    reward = 1.0 / static_cast<double>(w.tasks.size());
  }
  rb.range -= d;
  if (rb.range < 0.0) {
    // selections guarantee range covers task + return leg; only fp dust allowed
    if (rb.range < -1e-9) throw ContractError("apply: range went negative");
    rb.range = 0.0;
  }
  rb.at_depot = false;
  rb.t_next = w.clock + d / s.fleet.speed;
  w.decision_log.push_back({w.clock, robot, action});
  return reward;
}

namespace {

EpisodeResult finish(const WorldState& w,
                     std::vector<double> per_decision_times) {
  EpisodeResult res;
  int n_tasks = static_cast<int>(w.tasks.size());
  for (const auto& ts : w.tasks)
    if (ts.status == TaskStatus::completed) res.n_success += 1;
  res.f_cost = static_cast<double>(n_tasks - res.n_success) / n_tasks;
  res.completion_rate = static_cast<double>(res.n_success) / n_tasks;
  res.total_reward = w.reward_accum;
  res.per_decision_times = std::move(per_decision_times);
  res.n_decisions = static_cast<int>(res.per_decision_times.size());
  return res;
}

}  // namespace

EpisodeResult run_episode_from(WorldState world, const Scenario& s,
                               const Allocator& alloc, const SimConfig& cfg,
                               WorldState* final_world) {
  std::vector<double> per_decision_times;
  // selections are bounded by total demand, depot trips and parks by events
  long long guard = 1000 + 100LL * static_cast<long long>(s.tasks.size()) +
                    20LL * s.fleet.n_robots;
  long long steps = 0;
  while (true) {
    int r = try_next_decider(world);
    if (r < 0) break;
    if (++steps > guard)
      throw std::logic_error("run_episode: step guard exceeded, episode not terminating");
    advance_to_decision(world, s, r, cfg);
    auto t0 = std::chrono::steady_clock::now();
    int action = alloc.decide(world, s, r);
    auto t1 = std::chrono::steady_clock::now();
    per_decision_times.push_back(
        std::chrono::duration<double>(t1 - t0).count());
    if (action == 0 && world.robots[r].at_depot) {
      world.robots[r].parked = true;
      world.decision_log.push_back({world.clock, r, 0});
    } else {
      apply(world, s, r, action, cfg);
    }
  }
  EpisodeResult res = finish(world, std::move(per_decision_times));
  if (final_world) *final_world = std::move(world);
  return res;
}

EpisodeResult run_episode(const Scenario& s, const Allocator& alloc,
                          const SimConfig& cfg, WorldState* final_world) {
  return run_episode_from(init(s), s, alloc, cfg, final_world);
}

std::string episode_result_to_json(const EpisodeResult& r,
                                   const WorldState* world) {
  nlohmann::ordered_json j;
  j["n_success"] = r.n_success;
  j["completion_rate"] = r.completion_rate;
  j["f_cost"] = r.f_cost;
  j["total_reward"] = r.total_reward;
  j["n_decisions"] = r.n_decisions;
  j["per_decision_times"] = r.per_decision_times;
  if (world) {
    j["final_clock"] = world->clock;
    auto log = nlohmann::ordered_json::array();
    for (const auto& d : world->decision_log)
      log.push_back({{"time", d.time}, {"robot", d.robot}, {"action", d.action}});
    j["decision_log"] = std::move(log);
  }
  return j.dump(2) + "\n";
}

}  // namespace mrta
