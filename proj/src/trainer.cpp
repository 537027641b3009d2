#include "mrta/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numeric>
#include <sstream>

namespace mrta {

namespace {

// seed streams: disjoint tags keep held-out, batch and noise draws independent
constexpr std::uint64_t kHeldoutTag = 1ull << 40;
constexpr std::uint64_t kBatchTag = 1ull << 41;
constexpr std::uint64_t kNoiseTag = 1ull << 42;

double episode_reward(const PolicyParams& params, const Scenario& s) {
  BigCamConfig cfg;  // test-mode greedy, default shrink
  BigCamAllocator alloc(params, cfg);
  try {
    return run_episode(s, alloc).total_reward;
  } catch (const ContractError&) {
    // degenerate candidates (non-finite weights) score nothing
    return 0.0;
  }
}

// run fn(i) for i in [0, n) with at most `jobs` concurrent workers; results
// land in index order so reductions stay deterministic
template <typename Fn>
std::vector<double> indexed_parallel(int n, int jobs, Fn&& fn) {
  std::vector<double> out(n);
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  for (int start = 0; start < n; start += jobs) {
    int end = std::min(n, start + jobs);
    std::vector<std::future<double>> wave;
    wave.reserve(end - start);
    for (int i = start; i < end; ++i)
      wave.push_back(std::async(std::launch::async, fn, i));
    for (int i = start; i < end; ++i) out[i] = wave[i - start].get();
  }
  return out;
}

}  // namespace

double evaluate(const PolicyParams& params, const std::vector<Scenario>& scenarios,
                int jobs) {
  if (scenarios.empty()) throw ContractError("evaluate: empty scenario batch");
  std::vector<double> rewards = indexed_parallel(
      static_cast<int>(scenarios.size()), jobs,
      [&](int i) { return episode_reward(params, scenarios[i]); });
  return std::accumulate(rewards.begin(), rewards.end(), 0.0) /
         static_cast<double>(rewards.size());
}

std::pair<PolicyParams, TrainLog> train(const PolicyParams& initial,
                                        const TrainConfig& cfg,
                                        const ScenarioStream& stream) {
  if (cfg.population < 1 || cfg.elites < 1 || cfg.elites > cfg.population)
    throw ContractError("train: need 1 <= elites <= population");
  if (!(cfg.noise > 0)) throw ContractError("train: noise must be > 0");

  const Eigen::Index dim = param_count(initial.hyper);
  Eigen::VectorXd theta = flatten(initial);

  std::vector<Scenario> heldout;
  heldout.reserve(cfg.heldout_scenarios);
  for (int i = 0; i < cfg.heldout_scenarios; ++i)
    heldout.push_back(stream(derive_seed(cfg.seed, kHeldoutTag + i)));

  Eigen::VectorXd best_theta = theta;
  double best_score = evaluate(initial, heldout, cfg.jobs);

  TrainLog log;
  for (int g = 0; g < cfg.generations; ++g) {
    auto t0 = std::chrono::steady_clock::now();

    std::vector<Scenario> batch;
    batch.reserve(cfg.scenarios_per_eval);
    for (int j = 0; j < cfg.scenarios_per_eval; ++j)
      batch.push_back(stream(derive_seed(
          cfg.seed, kBatchTag + static_cast<std::uint64_t>(g) *
                                    cfg.scenarios_per_eval +
                        j)));

    Rng noise_rng(derive_seed(cfg.seed, kNoiseTag + g));
    std::vector<Eigen::VectorXd> cands;
    cands.reserve(cfg.population);
    while (static_cast<int>(cands.size()) < cfg.population) {
      Eigen::VectorXd eps(dim);
      for (Eigen::Index i = 0; i < dim; ++i) eps(i) = noise_rng.normal();
      eps *= cfg.noise;
      cands.push_back(theta + eps);
      if (cfg.antithetic && static_cast<int>(cands.size()) < cfg.population)
        cands.push_back(theta - eps);
    }

    std::vector<double> scores =
        indexed_parallel(cfg.population, cfg.jobs, [&](int i) {
          PolicyParams p = unflatten(cands[i], initial.hyper);
          double total = 0.0;
          for (const Scenario& s : batch) total += episode_reward(p, s);
          return total / static_cast<double>(batch.size());
        });

    std::vector<int> order(cfg.population);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });

    Eigen::VectorXd next = Eigen::VectorXd::Zero(dim);
    for (int e = 0; e < cfg.elites; ++e) next += cands[order[e]];
    theta = next / static_cast<double>(cfg.elites);
    if (!theta.allFinite())
      throw ContractError("train: recombined parameters are not finite");

    double held = evaluate(unflatten(theta, initial.hyper), heldout, cfg.jobs);
    if (held > best_score) {
      best_score = held;
      best_theta = theta;
    }

    double mean = std::accumulate(scores.begin(), scores.end(), 0.0) /
                  cfg.population;
    double var = 0.0;
    for (double v : scores) var += (v - mean) * (v - mean);
    var /= cfg.population;
    auto t1 = std::chrono::steady_clock::now();

    GenRecord rec;
    rec.generation = g;
    rec.best = scores[order[0]];
    rec.mean = mean;
    rec.std_dev = std::sqrt(var);
    rec.elapsed_s = std::chrono::duration<double>(t1 - t0).count();
    rec.param_norm = theta.norm();
    log.rows.push_back(rec);

    if (cfg.checkpoint_every > 0 && (g + 1) % cfg.checkpoint_every == 0 &&
        !cfg.checkpoint_prefix.empty()) {
      save_params(unflatten(theta, initial.hyper),
                  cfg.checkpoint_prefix + "_gen" + std::to_string(g + 1) +
                      ".params");
    }
  }

  return {unflatten(best_theta, initial.hyper), std::move(log)};
}

std::string train_log_to_csv(const TrainLog& log) {
  std::ostringstream out;
  out << "generation,best,mean,std,elapsed_s,param_norm\n";
  out.precision(17);
  for (const auto& r : log.rows) {
    out << r.generation << ',' << r.best << ',' << r.mean << ',' << r.std_dev
        << ',' << r.elapsed_s << ',' << r.param_norm << '\n';
  }
  return out.str();
}

}  // namespace mrta
