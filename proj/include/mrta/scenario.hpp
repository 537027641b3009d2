#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrta/common.hpp"

namespace mrta {

struct TaskSpec {
  int id = 0;  // 1..N^T, 0 is the depot
  double x = 0.0, y = 0.0;
  double deadline = 0.0;  // seconds
  int demand = 0;         // units
};

struct FleetSpec {
  int n_robots = 0;
  double speed = 0.01;     // km/s
  double max_range = 4.0;  // km on a full charge
  int max_capacity = 10;   // units of payload
};

struct Scenario {
  std::uint64_t seed = 0;
  Point depot{0.5, 0.5};
  FleetSpec fleet;
  std::vector<TaskSpec> tasks;  // index i holds id i+1

  bool operator==(const Scenario&) const = default;
};

inline bool operator==(const TaskSpec& a, const TaskSpec& b) {
  return a.id == b.id && a.x == b.x && a.y == b.y && a.deadline == b.deadline &&
         a.demand == b.demand;
}
inline bool operator==(const FleetSpec& a, const FleetSpec& b) {
  return a.n_robots == b.n_robots && a.speed == b.speed &&
         a.max_range == b.max_range && a.max_capacity == b.max_capacity;
}

struct GenerateConfig {
  double speed = 0.01;
  double max_range = 4.0;
  int max_capacity = 10;
  double deadline_min = 165.0;
  double deadline_max = 550.0;
  int demand_min = 1;
  int demand_max = 10;
};

Scenario generate(int n_tasks, int n_robots, std::uint64_t seed,
                  const GenerateConfig& cfg = {});

// N^T = 50*s_t, N^R = 6*s_t*s_r, seeds derived from base_seed
std::vector<Scenario> scaled_batch(int s_t, int s_r, int count,
                                   std::uint64_t base_seed,
                                   const GenerateConfig& cfg = {});

std::string scenario_to_json(const Scenario& s);
// strict = range-check deadlines/demands against the generation distribution;
// out-of-range values are otherwise accepted with a warning
Scenario scenario_from_json(const std::string& text, bool strict = false,
                            std::vector<std::string>* warnings = nullptr);

void save_scenario(const Scenario& s, const std::string& path);
Scenario load_scenario(const std::string& path, bool strict = false,
                       std::vector<std::string>* warnings = nullptr);

// fnv-1a over the canonical json, used to prove scenario sets are shared
std::uint64_t scenario_hash(const Scenario& s);

}  // namespace mrta
