#pragma once

#include <string>
#include <vector>

#include "mrta/common.hpp"
#include "mrta/scenario.hpp"

namespace mrta {

enum class TaskStatus { active, completed, expired };

struct TaskState {
  int residual = 0;   // w^t_i, units still wanted
  int committed = 0;  // units pledged by in-flight robots
  TaskStatus status = TaskStatus::active;
  double completion_time = -1.0;  // tau^f_i, -1 while unset
  int delivered_total = 0;
};

struct RobotState {
  Point dest;          // current destination; robots are modeled at their destination
  double range = 0.0;  // Delta^t_r, km left
  int capacity = 0;    // c^t_r, units carried
  double t_next = 0.0;
  bool at_depot = true;
  bool parked = false;     // retired at depot until new feasibility arises
  int pending_action = -1;  // -1 none, 0 depot run, >0 task id en route
  int pledge = 0;           // units committed to pending_action
};

struct DecisionRecord {
  double time = 0.0;
  int robot = 0;
  int action = 0;
};

struct WorldState {
  double clock = 0.0;
  std::vector<RobotState> robots;
  std::vector<TaskState> tasks;
  double reward_accum = 0.0;
  int n_task_visits = 0;
  std::vector<DecisionRecord> decision_log;
};

struct EpisodeResult {
  int n_success = 0;
  double completion_rate = 0.0;
  double f_cost = 0.0;
  double total_reward = 0.0;
  std::vector<double> per_decision_times;  // seconds, one per decision
  int n_decisions = 0;
};

struct SimConfig {
  // prune tasks whose uncommitted residual exceeds the robot's capacity
  // (the stricter legacy rule); default allows partial fulfillment
  bool strict_capacity_pruning = false;
};

WorldState init(const Scenario& s);

// robot with minimal t_next among non-parked ones, ties to the lowest index;
// throws ContractError when everyone is parked (termination)
int next_decider(const WorldState& w);
// same but returns -1 instead of throwing
int try_next_decider(const WorldState& w);

// move the clock to robot's decision instant: resolve its pending arrival
// (delivery or refill), sweep expired deadlines, refresh parked robots.
// Parked robots that still have feasible tasks are woken only when the
// advance resolved a task arrival (the matching cannot change otherwise)
void advance_to_decision(WorldState& w, const Scenario& s, int robot,
                         const SimConfig& cfg = {});

// feasible task ids for `robot`; the depot (0) is always allowed and not listed
std::vector<int> feasibility(const WorldState& w, const Scenario& s, int robot,
                             const SimConfig& cfg = {});

// commit the decision made at the robot's decision instant; returns the reward.
// action must be 0 or feasible; 0 while already at the depot is rejected
// (callers park the robot instead)
double apply(WorldState& w, const Scenario& s, int robot, int action,
             const SimConfig& cfg = {});

// one allocator instance serves one episode; params shared across instances
// must be immutable
struct Allocator {
  virtual int decide(const WorldState& w, const Scenario& s, int robot) const = 0;
  virtual ~Allocator() = default;
};

EpisodeResult run_episode(const Scenario& s, const Allocator& alloc,
                          const SimConfig& cfg = {},
                          WorldState* final_world = nullptr);
// same loop but starting from a prepared world (e.g. tasks pre-resolved)
EpisodeResult run_episode_from(WorldState world, const Scenario& s,
                               const Allocator& alloc, const SimConfig& cfg = {},
                               WorldState* final_world = nullptr);

std::string episode_result_to_json(const EpisodeResult& r,
                                   const WorldState* world = nullptr);

}  // namespace mrta
