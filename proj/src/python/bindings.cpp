#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mrta/analysis.hpp"
#include "mrta/common.hpp"
#include "mrta/expert.hpp"
#include "mrta/matching.hpp"
#include "mrta/policy.hpp"
#include "mrta/scenario.hpp"
#include "mrta/sim.hpp"

namespace py = pybind11;

namespace {

mrta::Scenario parse_scenario(const std::string& text) {
  return mrta::scenario_from_json(text);
}

py::dict run_episode_py(const std::string& scenario_json,
                        const std::string& method, std::uint64_t seed,
                        const std::string& params_path, double alpha,
                        bool strict_capacity) {
  mrta::Scenario scen = parse_scenario(scenario_json);
  mrta::SimConfig sim{strict_capacity};
  std::unique_ptr<mrta::Allocator> alloc;
  mrta::PolicyParams params;
  if (method == mrta::kMethodFeasRnd) {
    alloc = std::make_unique<mrta::FeasRndAllocator>(seed, sim);
  } else if (method == mrta::kMethodBigMrta) {
    alloc = std::make_unique<mrta::BigMrtaAllocator>(mrta::ExpertConfig{alpha},
                                                     sim);
  } else if (method == mrta::kMethodBigCam) {
    if (params_path.empty())
      throw mrta::ContractError("big-cam requires params_path");
    params = mrta::load_params(params_path);
    mrta::BigCamConfig cfg;
    cfg.sim = sim;
    alloc = std::make_unique<mrta::BigCamAllocator>(params, cfg, seed);
  } else {
    throw mrta::ContractError("unknown method: " + method);
  }
  mrta::EpisodeResult r = mrta::run_episode(scen, *alloc, sim);
  py::dict d;
  d["n_success"] = r.n_success;
  d["completion_rate"] = r.completion_rate;
  d["f_cost"] = r.f_cost;
  d["total_reward"] = r.total_reward;
  d["n_decisions"] = r.n_decisions;
  return d;
}

py::tuple hungarian_max_py(const Eigen::MatrixXd& weights,
                           const Eigen::MatrixXd& mask) {
  if (mask.rows() != weights.rows() || mask.cols() != weights.cols())
    throw mrta::ContractError("mask shape mismatch");
  mrta::WeightedBigraph bg;
  bg.weights = weights;
  bg.mask = mask.array() != 0.0;
  for (int r = 0; r < weights.rows(); ++r) bg.robot_ids.push_back(r);
  for (int c = 0; c < weights.cols(); ++c) bg.task_ids.push_back(c + 1);
  mrta::Matching m = mrta::hungarian_max(bg);
  py::list pairs;
  for (auto [r, c] : m.pairs) pairs.append(py::make_tuple(r, c));
  return py::make_tuple(pairs, m.objective);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "task allocation engine for collective transport";
  m.attr("__version__") = mrta::kVersion;

  py::register_exception<mrta::ContractError>(m, "ContractError");
  py::register_exception<mrta::IoError>(m, "IoError");

  m.def(
      "generate_scenario",
      [](int tasks, int robots, std::uint64_t seed, double max_range,
         int max_capacity) {
        mrta::GenerateConfig cfg;
        cfg.max_range = max_range;
        cfg.max_capacity = max_capacity;
        return mrta::scenario_to_json(
            mrta::generate(tasks, robots, seed, cfg));
      },
      py::arg("tasks"), py::arg("robots"), py::arg("seed") = 0,
      py::arg("max_range") = 4.0, py::arg("max_capacity") = 10,
      "generate a random scenario, returned as canonical json");

  m.def(
      "scenario_hash",
      [](const std::string& text) { return mrta::scenario_hash(parse_scenario(text)); },
      py::arg("scenario_json"));

  m.def("run_episode", &run_episode_py, py::arg("scenario_json"),
        py::arg("method") = mrta::kMethodBigMrta, py::arg("seed") = 0,
        py::arg("params_path") = std::string(), py::arg("alpha") = 550.0,
        py::arg("strict_capacity") = false,
        "run one full episode and return its summary");

  m.def("hungarian_max", &hungarian_max_py, py::arg("weights"), py::arg("mask"),
        "maximum-weight bipartite matching; returns (pairs, objective)");

  m.def(
      "welch_t",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        mrta::WelchResult r = mrta::welch_t(a, b);
        return py::make_tuple(r.t, r.p, r.degenerate);
      },
      py::arg("a"), py::arg("b"), "two-sided welch t-test: (t, p, degenerate)");

  m.def(
      "sinkhorn_distance",
      [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double reg,
         int iters) { return mrta::sinkhorn_distance(a, b, reg, iters); },
      py::arg("a"), py::arg("b"), py::arg("reg") = 0.1, py::arg("iters") = 200);

  m.def(
      "write_initial_params",
      [](const std::string& path, std::uint64_t seed, int heads) {
        mrta::PolicyHyper hyper;
        hyper.n_heads = heads;
        mrta::save_params(mrta::init_params(hyper, seed), path);
        return mrta::param_count(hyper);
      },
      py::arg("path"), py::arg("seed") = 0, py::arg("heads") = 8,
      "write freshly initialized policy params; returns the parameter count");
}
