#include <chrono>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mrta/analysis.hpp"
#include "mrta/common.hpp"
#include "mrta/expert.hpp"
#include "mrta/matching.hpp"
#include "mrta/policy.hpp"
#include "mrta/scenario.hpp"
#include "mrta/sim.hpp"
#include "mrta/trainer.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

void write_text(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw mrta::IoError("cannot write " + path);
  os << content;
  if (!os) throw mrta::IoError("write failed: " + path);
}

// every artifact gets a sibling .meta.json carrying the tool version and the
// full resolved config; rerunning from it reproduces non-timing outputs
void write_meta(const std::string& artifact_path, const std::string& command,
                const json& config, const json& extra = json::object()) {
  json meta;
  meta["tool"] = "mrta";
  meta["version"] = mrta::kVersion;
  meta["command"] = command;
  meta["config"] = config;
  for (auto it = extra.begin(); it != extra.end(); ++it)
    meta[it.key()] = it.value();
  write_text(artifact_path + ".meta.json", meta.dump(2) + "\n");
}

struct CommonArgs {
  int s_t = 1, s_r = 1;
  int tasks = 0, robots = 0;  // direct counts, override the scales when set
  std::uint64_t seed = 0;
  double max_range = 4.0;
  int max_capacity = 10;
  bool strict_capacity = false;
};

void add_scale_opts(CLI::App* sub, CommonArgs& c) {
  sub->add_option("--tasks-scale", c.s_t, "task-count scale s_t (N^T = 50*s_t)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--robots-scale", c.s_r,
                  "robot-density scale s_r (N^R = 6*s_t*s_r)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--tasks", c.tasks, "task count, overrides --tasks-scale")
      ->check(CLI::PositiveNumber);
  sub->add_option("--robots", c.robots, "robot count, overrides --robots-scale")
      ->check(CLI::PositiveNumber);
}

void add_fleet_opts(CLI::App* sub, CommonArgs& c) {
  sub->add_option("--max-range", c.max_range, "range budget per sortie, km")
      ->check(CLI::PositiveNumber);
  sub->add_option("--max-capacity", c.max_capacity, "payload capacity, units")
      ->check(CLI::PositiveNumber);
}

int resolved_tasks(const CommonArgs& c) {
  return c.tasks > 0 ? c.tasks : 50 * c.s_t;
}
int resolved_robots(const CommonArgs& c) {
  return c.robots > 0 ? c.robots : 6 * c.s_t * c.s_r;
}

mrta::GenerateConfig gen_config(const CommonArgs& c) {
  mrta::GenerateConfig g;
  g.max_range = c.max_range;
  g.max_capacity = c.max_capacity;
  return g;
}

json common_json(const CommonArgs& c) {
  return json{{"tasks", resolved_tasks(c)},
              {"robots", resolved_robots(c)},
              {"tasks_scale", c.s_t},
              {"robots_scale", c.s_r},
              {"seed", c.seed},
              {"max_range", c.max_range},
              {"max_capacity", c.max_capacity},
              {"strict_capacity", c.strict_capacity}};
}

std::unique_ptr<mrta::Allocator> make_allocator(
    const std::string& method, const mrta::Scenario& scen,
    const mrta::PolicyParams* params, std::uint64_t seed, bool seed_set,
    double alpha, const mrta::BigCamConfig& cam, const mrta::SimConfig& sim) {
  if (method == mrta::kMethodFeasRnd)
    return std::make_unique<mrta::FeasRndAllocator>(
        seed_set ? seed : mrta::derive_seed(scen.seed, 0x5eed), sim);
  if (method == mrta::kMethodBigMrta)
    return std::make_unique<mrta::BigMrtaAllocator>(
        mrta::ExpertConfig{alpha}, sim);
  if (method == mrta::kMethodBigCam) {
    if (params == nullptr)
      throw mrta::ContractError("big-cam requires a params file");
    mrta::BigCamConfig cfg = cam;
    cfg.sim = sim;
    return std::make_unique<mrta::BigCamAllocator>(
        *params, cfg, seed_set ? seed : mrta::derive_seed(scen.seed, 0xca11));
  }
  throw mrta::ContractError("unknown method: " + method);
}

// ---- generate ----

struct GenerateArgs {
  CommonArgs c;
  int n = 1;
  std::string out;
};

void cmd_generate(const GenerateArgs& a) {
  fs::create_directories(a.out);
  int tasks = resolved_tasks(a.c), robots = resolved_robots(a.c);
  json files = json::array();
  for (int k = 0; k < a.n; ++k) {
    mrta::Scenario s = mrta::generate(
        tasks, robots, mrta::derive_seed(a.c.seed, static_cast<std::uint64_t>(k)),
        gen_config(a.c));
    char name[32];
    std::snprintf(name, sizeof(name), "scenario_%04d.json", k);
    std::string path = (fs::path(a.out) / name).string();
    mrta::save_scenario(s, path);
    files.push_back(
        {{"file", name}, {"seed", s.seed}, {"hash", mrta::scenario_hash(s)}});
  }
  json manifest{{"format", 1},
                {"tasks", tasks},
                {"robots", robots},
                {"count", a.n},
                {"base_seed", a.c.seed},
                {"files", files}};
  std::string manifest_path = (fs::path(a.out) / "manifest.json").string();
  write_text(manifest_path, manifest.dump(2) + "\n");
  json cfg = common_json(a.c);
  cfg["n"] = a.n;
  cfg["out"] = a.out;
  write_meta(manifest_path, "generate", cfg);
  std::cout << "wrote " << a.n << " scenario(s) to " << a.out << "\n";
}

// ---- run ----

struct RunArgs {
  std::string scenario_path;
  std::string method = mrta::kMethodBigMrta;
  std::string params_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double alpha = 550.0;
  double epsilon = 0.2;
  bool train_sampling = false;
  int shrink_robots = 6, shrink_tasks = 50;
  bool strict_capacity = false;
  std::string out;
};

void cmd_run(const RunArgs& a) {
  std::vector<std::string> warnings;
  mrta::Scenario scen = mrta::load_scenario(a.scenario_path, false, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

  mrta::PolicyParams params;
  const mrta::PolicyParams* pp = nullptr;
  if (!a.params_path.empty()) {
    params = mrta::load_params(a.params_path);
    pp = &params;
  }
  mrta::SimConfig sim{a.strict_capacity};
  mrta::BigCamConfig cam;
  cam.sample.mode =
      a.train_sampling ? mrta::SampleMode::train : mrta::SampleMode::test;
  cam.sample.epsilon = a.epsilon;
  cam.shrink_robots = a.shrink_robots;
  cam.shrink_tasks = a.shrink_tasks;
  auto alloc =
      make_allocator(a.method, scen, pp, a.seed, a.seed_set, a.alpha, cam, sim);

  mrta::WorldState final_world;
  mrta::EpisodeResult er = mrta::run_episode(scen, *alloc, sim, &final_world);
  std::string text = mrta::episode_result_to_json(er, &final_world);
  std::cout << text;
  if (!a.out.empty()) {
    write_text(a.out, text);
    json cfg{{"scenario", a.scenario_path},
             {"scenario_hash", mrta::scenario_hash(scen)},
             {"method", a.method},
             {"params", a.params_path},
             {"seed", a.seed_set ? json(a.seed) : json(nullptr)},
             {"alpha", a.alpha},
             {"epsilon", a.epsilon},
             {"train_sampling", a.train_sampling},
             {"shrink_robots", a.shrink_robots},
             {"shrink_tasks", a.shrink_tasks},
             {"strict_capacity", a.strict_capacity}};
    write_meta(a.out, "run", cfg);
  }
}

// ---- train ----

struct TrainArgs {
  CommonArgs c;
  std::string params_path;  // resume checkpoint
  int generations = 100, population = 16, elites = 4, scenarios_per_eval = 8;
  double noise = 0.05;
  int heads = 8;
  int jobs = 1;
  int checkpoint_every = 0;
  std::string out;
};

void cmd_train(const TrainArgs& a) {
  TrainArgs args = a;
  if (args.c.tasks == 0 && args.c.robots == 0 && args.c.s_t == 1 &&
      args.c.s_r == 1) {
    // training default mirrors the benchmark base case
    args.c.tasks = 50;
    args.c.robots = 6;
  }
  mrta::PolicyHyper hyper;
  hyper.n_heads = args.heads;
  mrta::PolicyParams initial =
      args.params_path.empty()
          ? mrta::init_params(hyper, mrta::derive_seed(args.c.seed, 0x1417))
          : mrta::load_params(args.params_path);

  mrta::TrainConfig tc;
  tc.population = args.population;
  tc.elites = args.elites;
  tc.noise = args.noise;
  tc.generations = args.generations;
  tc.scenarios_per_eval = args.scenarios_per_eval;
  tc.seed = args.c.seed;
  tc.jobs = args.jobs;
  tc.checkpoint_every = args.checkpoint_every;
  if (args.checkpoint_every > 0)
    tc.checkpoint_prefix = fs::path(args.out).replace_extension("").string();

  int tasks = resolved_tasks(args.c), robots = resolved_robots(args.c);
  mrta::GenerateConfig gcfg = gen_config(args.c);
  auto stream = [tasks, robots, gcfg](std::uint64_t s) {
    return mrta::generate(tasks, robots, s, gcfg);
  };
  auto [best, log] = mrta::train(initial, tc, stream);
  mrta::save_params(best, args.out);
  std::string log_path = args.out + ".log.csv";
  write_text(log_path, mrta::train_log_to_csv(log));

  json cfg = common_json(args.c);
  cfg["resume_params"] = args.params_path;
  cfg["generations"] = args.generations;
  cfg["population"] = args.population;
  cfg["elites"] = args.elites;
  cfg["noise"] = args.noise;
  cfg["scenarios_per_eval"] = args.scenarios_per_eval;
  cfg["heads"] = args.heads;
  cfg["jobs"] = args.jobs;
  cfg["checkpoint_every"] = args.checkpoint_every;
  cfg["out"] = args.out;
  write_meta(args.out, "train", cfg, json{{"log", log_path}});
  if (!log.rows.empty())
    std::cout << "trained " << log.rows.size() << " generation(s), last best "
              << log.rows.back().best << "\n";
  std::cout << "params written to " << args.out << "\n";
}

// ---- bench ----

struct BenchArgs {
  CommonArgs c;
  std::vector<std::string> methods{mrta::kMethodBigMrta, mrta::kMethodFeasRnd};
  int n = 100;
  std::string params_path;
  double alpha = 550.0;
  int shrink_robots = 6, shrink_tasks = 50;
  int jobs = 1;
  std::string out;
};

void cmd_bench(const BenchArgs& a) {
  mrta::BenchOptions opt;
  opt.params_path = a.params_path;
  opt.expert.alpha = a.alpha;
  opt.cam.shrink_robots = a.shrink_robots;
  opt.cam.shrink_tasks = a.shrink_tasks;
  opt.sim.strict_capacity_pruning = a.c.strict_capacity;
  opt.gen = gen_config(a.c);
  opt.jobs = a.jobs;
  if (a.c.tasks > 0 || a.c.robots > 0)
    throw mrta::ContractError("bench takes --tasks-scale/--robots-scale only");

  auto t0 = std::chrono::steady_clock::now();
  auto results =
      mrta::bench(a.methods, a.c.s_t, a.c.s_r, a.n, a.c.seed, opt);
  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  fs::create_directories(a.out);
  std::string results_path = (fs::path(a.out) / "results.csv").string();
  write_text(results_path, mrta::bench_results_to_csv(results));

  json ttests = json::array();
  std::string ttest_csv = "method_a,method_b,t,p,degenerate\n";
  for (size_t i = 0; i < results.size(); ++i)
    for (size_t j = i + 1; j < results.size(); ++j) {
      mrta::WelchResult wr = mrta::welch_t(results[i].rates, results[j].rates);
      char line[256];
      std::snprintf(line, sizeof(line), "%s,%s,%.17g,%.17g,%d\n",
                    results[i].method.c_str(), results[j].method.c_str(), wr.t,
                    wr.p, wr.degenerate ? 1 : 0);
      ttest_csv += line;
      ttests.push_back({{"a", results[i].method},
                        {"b", results[j].method},
                        {"t", wr.t},
                        {"p", wr.p},
                        {"degenerate", wr.degenerate}});
    }
  std::string ttests_path = (fs::path(a.out) / "ttests.csv").string();
  if (results.size() > 1) write_text(ttests_path, ttest_csv);

  json cfg = common_json(a.c);
  cfg["methods"] = a.methods;
  cfg["n"] = a.n;
  cfg["params"] = a.params_path;
  cfg["alpha"] = a.alpha;
  cfg["shrink_robots"] = a.shrink_robots;
  cfg["shrink_tasks"] = a.shrink_tasks;
  cfg["jobs"] = a.jobs;
  cfg["out"] = a.out;
  json extra;
  extra["elapsed_s"] = elapsed;
  extra["scenario_hashes"] = results.front().scenario_hashes;
  json summary = json::array();
  for (const auto& r : results) {
    summary.push_back({{"method", r.method},
                       {"mean", r.mean},
                       {"median", r.median},
                       {"std", r.std_dev}});
    std::cout << r.method << ": mean " << r.mean << " median " << r.median
              << " std " << r.std_dev << "\n";
  }
  extra["summary"] = summary;
  if (results.size() > 1) extra["ttests"] = ttests;
  write_meta(results_path, "bench", cfg, extra);
  std::cout << "results written to " << results_path << "\n";
}

// ---- compare-weights ----

struct CompareArgs {
  std::vector<std::string> checkpoints;  // params paths, or the literal "expert"
  int n = 1000;
  std::uint64_t seed = 0;
  double reg = 0.1;
  double alpha = 550.0;
  bool strict_capacity = false;
  std::string out;
};

void cmd_compare(const CompareArgs& a) {
  mrta::SimConfig sim{a.strict_capacity};
  std::vector<mrta::StateSample> states = mrta::sample_states(a.n, a.seed, sim);

  std::deque<mrta::PolicyParams> storage;
  std::vector<mrta::CheckpointEntry> entries;
  for (const auto& c : a.checkpoints) {
    if (c == "expert") {
      entries.push_back({c, nullptr});
    } else {
      storage.push_back(mrta::load_params(c));
      entries.push_back({c, &storage.back()});
    }
  }
  auto rows = mrta::checkpoint_divergence(entries, states, a.reg, 200,
                                          mrta::ExpertConfig{a.alpha}, sim);
  std::string csv = mrta::comparison_to_csv(rows);
  if (a.out.empty()) {
    std::cout << csv;
    return;
  }
  write_text(a.out, csv);
  json cfg{{"checkpoints", a.checkpoints}, {"n", a.n},
           {"seed", a.seed},               {"sinkhorn_reg", a.reg},
           {"alpha", a.alpha},             {"strict_capacity", a.strict_capacity},
           {"out", a.out}};
  json stamps = json::array();
  for (const auto& r : rows)
    stamps.push_back({{"checkpoint", r.checkpoint},
                      {"n_states", r.n_states},
                      {"mean_sinkhorn", r.mean_distance},
                      {"elapsed_s", r.elapsed_s}});
  write_meta(a.out, "compare-weights", cfg, json{{"checkpoints", stamps}});
  for (const auto& r : rows)
    std::cout << r.checkpoint << ": mean sinkhorn " << r.mean_distance
              << " over " << r.n_states << " state(s)\n";
  std::cout << "comparison written to " << a.out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-robot task allocation engine"};
  app.set_version_flag("--version", std::string(mrta::kVersion));
  app.require_subcommand(1);

  GenerateArgs ga;
  CLI::App* gen = app.add_subcommand("generate", "write scenario files");
  add_scale_opts(gen, ga.c);
  add_fleet_opts(gen, ga.c);
  gen->add_option("--n", ga.n, "number of scenarios")->check(CLI::PositiveNumber);
  gen->add_option("--seed", ga.c.seed, "base seed");
  gen->add_option("--out", ga.out, "output directory")->required();
  gen->callback([&] { cmd_generate(ga); });

  RunArgs ra;
  CLI::App* run = app.add_subcommand("run", "run one episode on a scenario");
  run->add_option("--scenario", ra.scenario_path, "scenario json")->required();
  run->add_option("--method", ra.method, "big-cam | big-mrta | feas-rnd");
  run->add_option("--params", ra.params_path, "policy params (big-cam)");
  auto* seed_opt = run->add_option("--seed", ra.seed, "episode rng seed");
  run->add_option("--alpha", ra.alpha, "expert incentive decay, seconds")
      ->check(CLI::PositiveNumber);
  run->add_option("--epsilon", ra.epsilon, "exploration rate (train sampling)")
      ->check(CLI::Range(0.0, 1.0));
  run->add_flag("--train-sampling", ra.train_sampling,
                "sample weights instead of greedy means");
  run->add_option("--shrink-robots", ra.shrink_robots, "decoder robot budget")
      ->check(CLI::PositiveNumber);
  run->add_option("--shrink-tasks", ra.shrink_tasks, "decoder task budget")
      ->check(CLI::PositiveNumber);
  run->add_flag("--strict-capacity", ra.strict_capacity,
                "prune tasks whose residual exceeds robot capacity");
  run->add_option("--out", ra.out, "write the episode json here");
  run->callback([&] {
    ra.seed_set = seed_opt->count() > 0;
    cmd_run(ra);
  });

  TrainArgs ta;
  CLI::App* tr = app.add_subcommand("train", "evolutionary policy search");
  add_scale_opts(tr, ta.c);
  add_fleet_opts(tr, ta.c);
  tr->add_option("--seed", ta.c.seed, "training seed");
  tr->add_option("--params", ta.params_path, "resume from this checkpoint");
  tr->add_option("--generations", ta.generations)
      ->check(CLI::NonNegativeNumber);
  tr->add_option("--population", ta.population)->check(CLI::PositiveNumber);
  tr->add_option("--elites", ta.elites)->check(CLI::PositiveNumber);
  tr->add_option("--noise", ta.noise, "perturbation scale")
      ->check(CLI::PositiveNumber);
  tr->add_option("--scenarios-per-eval", ta.scenarios_per_eval)
      ->check(CLI::PositiveNumber);
  tr->add_option("--heads", ta.heads, "attention heads (fresh init only)")
      ->check(CLI::PositiveNumber);
  tr->add_option("--jobs", ta.jobs, "parallel episode workers")
      ->check(CLI::PositiveNumber);
  tr->add_option("--checkpoint-every", ta.checkpoint_every,
                 "save params every k generations (0 = off)")
      ->check(CLI::NonNegativeNumber);
  tr->add_option("--out", ta.out, "output params file")->required();
  tr->callback([&] { cmd_train(ta); });

  BenchArgs ba;
  CLI::App* be = app.add_subcommand("bench", "compare methods on a shared set");
  add_scale_opts(be, ba.c);
  add_fleet_opts(be, ba.c);
  be->add_option("--method", ba.methods, "methods to run (repeatable)")
      ->delimiter(',');
  be->add_option("--n", ba.n, "scenarios per method")->check(CLI::PositiveNumber);
  be->add_option("--seed", ba.c.seed, "base seed for the scenario set");
  be->add_option("--params", ba.params_path, "policy params (big-cam)");
  be->add_option("--alpha", ba.alpha, "expert incentive decay, seconds")
      ->check(CLI::PositiveNumber);
  be->add_option("--shrink-robots", ba.shrink_robots, "decoder robot budget")
      ->check(CLI::PositiveNumber);
  be->add_option("--shrink-tasks", ba.shrink_tasks, "decoder task budget")
      ->check(CLI::PositiveNumber);
  be->add_flag("--strict-capacity", ba.c.strict_capacity,
               "prune tasks whose residual exceeds robot capacity");
  be->add_option("--jobs", ba.jobs, "parallel episode workers")
      ->check(CLI::PositiveNumber);
  be->add_option("--out", ba.out, "output directory")->required();
  be->callback([&] { cmd_bench(ba); });

  CompareArgs ca;
  CLI::App* cw = app.add_subcommand(
      "compare-weights", "sinkhorn divergence of checkpoints from the expert");
  cw->add_option("checkpoints", ca.checkpoints,
                 "params files, or the literal 'expert'")
      ->required();
  cw->add_option("--n", ca.n, "sampled decision states")
      ->check(CLI::PositiveNumber);
  cw->add_option("--seed", ca.seed, "state sampling seed");
  cw->add_option("--sinkhorn-reg", ca.reg, "entropic regularization")
      ->check(CLI::PositiveNumber);
  cw->add_option("--alpha", ca.alpha, "expert incentive decay, seconds")
      ->check(CLI::PositiveNumber);
  cw->add_flag("--strict-capacity", ca.strict_capacity,
               "prune tasks whose residual exceeds robot capacity");
  cw->add_option("--out", ca.out, "output csv (stdout when omitted)");
  cw->callback([&] { cmd_compare(ca); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const mrta::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const mrta::ContractError& e) {
    std::cerr << "contract error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
