#include "mrta/scenario.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mrta/rng.hpp"

namespace mrta {

using ordered_json = nlohmann::ordered_json;

Scenario generate(int n_tasks, int n_robots, std::uint64_t seed,
                  const GenerateConfig& cfg) {
  if (n_tasks < 1 || n_robots < 1)
    throw ContractError("generate: n_tasks and n_robots must be >= 1");
  Scenario s;
  s.seed = seed;
  s.depot = {0.5, 0.5};
  s.fleet.n_robots = n_robots;
  s.fleet.speed = cfg.speed;
  s.fleet.max_range = cfg.max_range;
  s.fleet.max_capacity = cfg.max_capacity;
  Rng rng(seed);
  s.tasks.reserve(n_tasks);
  for (int i = 0; i < n_tasks; ++i) {
    TaskSpec t;
    t.id = i + 1;
    t.x = rng.uniform();
    t.y = rng.uniform();
    t.deadline = rng.uniform(cfg.deadline_min, cfg.deadline_max);
    t.demand = static_cast<int>(rng.uniform_int(cfg.demand_min, cfg.demand_max));
    s.tasks.push_back(t);
  }
  return s;
}

std::vector<Scenario> scaled_batch(int s_t, int s_r, int count,
                                   std::uint64_t base_seed,
                                   const GenerateConfig& cfg) {
  if (s_t < 1 || s_r < 1 || count < 0)
    throw ContractError("scaled_batch: scales must be >= 1");
  std::vector<Scenario> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    std::uint64_t seed = derive_seed(base_seed, static_cast<std::uint64_t>(k));
    out.push_back(generate(50 * s_t, 6 * s_t * s_r, seed, cfg));
  }
  return out;
}

std::string scenario_to_json(const Scenario& s) {
  ordered_json j;
  j["format"] = 1;
  j["seed"] = s.seed;
  j["depot"] = {s.depot.x, s.depot.y};
  j["fleet"] = {{"n_robots", s.fleet.n_robots},
                {"speed", s.fleet.speed},
                {"max_range", s.fleet.max_range},
                {"max_capacity", s.fleet.max_capacity}};
  j["tasks"] = ordered_json::array();
  for (const auto& t : s.tasks) {
    j["tasks"].push_back({{"id", t.id},
                          {"x", t.x},
                          {"y", t.y},
                          {"deadline", t.deadline},
                          {"demand", t.demand}});
  }
  return j.dump(2) + "\n";
}

namespace {

template <typename T>
T require(const ordered_json& j, const char* key) {
  if (!j.contains(key))
    throw IoError(std::string("scenario: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw IoError(std::string("scenario: field '") + key + "' has wrong type");
  }
}

}  // namespace

Scenario scenario_from_json(const std::string& text, bool strict,
                            std::vector<std::string>* warnings) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("scenario: parse error: ") + e.what());
  }
  int format = require<int>(j, "format");
  if (format != 1)
    throw IoError("scenario: field 'format' must be 1, got " +
                  std::to_string(format));
  Scenario s;
  s.seed = require<std::uint64_t>(j, "seed");
  auto depot = require<std::vector<double>>(j, "depot");
  if (depot.size() != 2) throw IoError("scenario: field 'depot' must be [x,y]");
  s.depot = {depot[0], depot[1]};
  if (!j.contains("fleet")) throw IoError("scenario: missing field 'fleet'");
  const auto& jf = j.at("fleet");
  s.fleet.n_robots = require<int>(jf, "n_robots");
  s.fleet.speed = require<double>(jf, "speed");
  s.fleet.max_range = require<double>(jf, "max_range");
  s.fleet.max_capacity = require<int>(jf, "max_capacity");
  if (s.fleet.n_robots < 1) throw IoError("scenario: field 'n_robots' must be >= 1");
  if (!(s.fleet.speed > 0)) throw IoError("scenario: field 'speed' must be > 0");
  if (!(s.fleet.max_range > 0)) throw IoError("scenario: field 'max_range' must be > 0");
  if (s.fleet.max_capacity < 1)
    throw IoError("scenario: field 'max_capacity' must be >= 1");
  if (!j.contains("tasks")) throw IoError("scenario: missing field 'tasks'");
  const auto& jt = j.at("tasks");
  if (!jt.is_array() || jt.empty())
    throw IoError("scenario: field 'tasks' must be a nonempty array");
  GenerateConfig dist;  // generation distribution, for strict range checks
  int idx = 0;
  for (const auto& e : jt) {
    TaskSpec t;
    t.id = require<int>(e, "id");
    t.x = require<double>(e, "x");
    t.y = require<double>(e, "y");
    t.deadline = require<double>(e, "deadline");
    t.demand = require<int>(e, "demand");
    if (t.id != idx + 1)
      throw IoError("scenario: task ids must be contiguous 1..N, got id " +
                    std::to_string(t.id) + " at position " + std::to_string(idx));
    if (t.demand < 1) throw IoError("scenario: field 'demand' must be >= 1");
    if (!(t.deadline > 0)) throw IoError("scenario: field 'deadline' must be > 0");
    bool in_range = t.deadline >= dist.deadline_min &&
                    t.deadline <= dist.deadline_max &&
                    t.demand <= dist.demand_max && t.x >= 0 && t.x <= 1 &&
                    t.y >= 0 && t.y <= 1;
    if (!in_range) {
      std::string msg = "task " + std::to_string(t.id) +
                        " outside the generation distribution";
      if (strict) throw IoError("scenario: " + msg);
      if (warnings) warnings->push_back(msg);
    }
    s.tasks.push_back(t);
    ++idx;
  }
  return s;
}

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << scenario_to_json(s);
  if (!out) throw IoError("write failed: " + path);
}

Scenario load_scenario(const std::string& path, bool strict,
                       std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str(), strict, warnings);
}

std::uint64_t scenario_hash(const Scenario& s) {
  std::string text = scenario_to_json(s);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace mrta
