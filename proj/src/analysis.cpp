#include "mrta/analysis.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <future>
#include <memory>
#include <sstream>

#include "mrta/matching.hpp"
#include "mrta/rng.hpp"

namespace mrta {
namespace {

// run fn(0..n-1) across `jobs` async waves, results in index order
template <typename T, typename Fn>
std::vector<T> indexed_parallel(int n, int jobs, Fn&& fn) {
  std::vector<T> out(n);
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  for (int base = 0; base < n; base += jobs) {
    int wave = std::min(jobs, n - base);
    std::vector<std::future<T>> futs;
    futs.reserve(wave);
    for (int k = 0; k < wave; ++k)
      futs.push_back(std::async(std::launch::async, fn, base + k));
    for (int k = 0; k < wave; ++k) out[base + k] = futs[k].get();
  }
  return out;
}

double vec_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double vec_median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double vec_sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = vec_mean(v), acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double sample_var(const std::vector<double>& v) {
  double m = vec_mean(v), acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size() - 1);
}

std::unique_ptr<Allocator> make_allocator(const std::string& method,
                                          const Scenario& scen,
                                          const BenchOptions& opt,
                                          const PolicyParams* params) {
  if (method == kMethodFeasRnd)
    return std::make_unique<FeasRndAllocator>(derive_seed(scen.seed, 0x5eed),
                                              opt.sim);
  if (method == kMethodBigMrta)
    return std::make_unique<BigMrtaAllocator>(opt.expert, opt.sim);
  if (method == kMethodBigCam) {
    BigCamConfig cfg = opt.cam;
    cfg.sim = opt.sim;
    return std::make_unique<BigCamAllocator>(*params, cfg,
                                             derive_seed(scen.seed, 0xca11));
  }
  throw ContractError("unknown method: " + method);
}

}  // namespace

std::vector<BenchResult> bench(const std::vector<std::string>& methods, int s_t,
                               int s_r, int n_scenarios,
                               std::uint64_t base_seed, const BenchOptions& opt) {
  if (methods.empty()) throw ContractError("bench: no methods given");
  if (n_scenarios < 1) throw ContractError("bench: n_scenarios < 1");
  for (const auto& m : methods)
    if (m != kMethodBigCam && m != kMethodBigMrta && m != kMethodFeasRnd)
      throw ContractError("unknown method: " + m);

  PolicyParams params;
  bool have_params = false;
  if (std::find(methods.begin(), methods.end(), kMethodBigCam) != methods.end()) {
    if (opt.params_path.empty())
      throw ContractError("big-cam requires a params file");
    params = load_params(opt.params_path);
    have_params = true;
  }

  // one scenario set shared by every method
  std::vector<Scenario> scenarios =
      scaled_batch(s_t, s_r, n_scenarios, base_seed, opt.gen);
  std::vector<std::uint64_t> seeds, hashes;
  for (const auto& s : scenarios) {
    seeds.push_back(s.seed);
    hashes.push_back(scenario_hash(s));
  }

  std::vector<BenchResult> out;
  for (const auto& method : methods) {
    BenchResult r;
    r.method = method;
    r.s_t = s_t;
    r.s_r = s_r;
    r.scenario_seeds = seeds;
    r.scenario_hashes = hashes;

    struct Row {
      double rate, total_s, mean_s;
    };
    auto rows = indexed_parallel<Row>(
        n_scenarios, opt.jobs, [&](int i) -> Row {
          auto alloc = make_allocator(method, scenarios[i], opt,
                                      have_params ? &params : nullptr);
          EpisodeResult er = run_episode(scenarios[i], *alloc, opt.sim);
          double total = 0.0;
          for (double t : er.per_decision_times) total += t;
          double mean =
              er.n_decisions > 0 ? total / er.n_decisions : 0.0;
          return {er.completion_rate, total, mean};
        });
    for (const auto& row : rows) {
      r.rates.push_back(row.rate);
      r.episode_decision_time.push_back(row.total_s);
      r.mean_decision_time.push_back(row.mean_s);
    }
    r.mean = vec_mean(r.rates);
    r.median = vec_median(r.rates);
    r.std_dev = vec_sample_std(r.rates);
    out.push_back(std::move(r));
  }
  return out;
}

std::string bench_results_to_csv(const std::vector<BenchResult>& results) {
  std::ostringstream os;
  os.precision(17);
  os << "method,s_t,s_r,scenario_seed,completion_rate,episode_decision_time_s,"
        "mean_decision_time_s\n";
  for (const auto& r : results)
    for (size_t i = 0; i < r.rates.size(); ++i)
      os << r.method << ',' << r.s_t << ',' << r.s_r << ','
         << r.scenario_seeds[i] << ',' << r.rates[i] << ','
         << r.episode_decision_time[i] << ',' << r.mean_decision_time[i]
         << '\n';
  return os.str();
}

WelchResult welch_t(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw ContractError("welch_t: need at least two samples per side");
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double ma = vec_mean(a), mb = vec_mean(b);
  double va = sample_var(a), vb = sample_var(b);

  WelchResult res;
  if (va == 0.0 && vb == 0.0) {
    res.degenerate = true;
    if (ma == mb) {
      res.t = 0.0;
      res.p = 1.0;
    } else {
      res.t = ma > mb ? std::numeric_limits<double>::infinity()
                      : -std::numeric_limits<double>::infinity();
      res.p = 0.0;
    }
    return res;
  }
  double sa = va / na, sb = vb / nb;
  res.t = (ma - mb) / std::sqrt(sa + sb);
  double df = (sa + sb) * (sa + sb) /
              (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  boost::math::students_t dist(df);
  res.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(res.t)));
  return res;
}

namespace {

// entropic transport cost under the 0/1 ground cost: K = q*11^T + (1-q)*I
// with q = exp(-1/reg), so K*x is q*sum(x) + (1-q)*x and each iteration stays
// O(n); cost <T,C> = total mass - trace, rows sum to a after the final u
// update and K_ii = 1
double entropic_cost(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                     double q, int iters) {
  Eigen::VectorXd u = Eigen::VectorXd::Ones(a.size());
  Eigen::VectorXd v = Eigen::VectorXd::Ones(a.size());
  for (int it = 0; it < iters; ++it) {
    v = b.array() / (q * u.sum() + (1.0 - q) * u.array());
    u = a.array() / (q * v.sum() + (1.0 - q) * v.array());
  }
  return 1.0 - u.dot(v);
}

}  // namespace

double sinkhorn_distance(const Eigen::VectorXd& a_in, const Eigen::VectorXd& b_in,
                         double reg, int iters) {
  if (a_in.size() != b_in.size())
    throw ContractError("sinkhorn: support sizes differ");
  if (a_in.size() == 0) throw ContractError("sinkhorn: empty support");
  if (reg <= 0.0) throw ContractError("sinkhorn: reg must be positive");
  if (iters < 1) throw ContractError("sinkhorn: iters must be positive");
  if ((a_in.array() < 0.0).any() || (b_in.array() < 0.0).any())
    throw ContractError("sinkhorn: negative mass");
  double sa = a_in.sum(), sb = b_in.sum();
  if (sa <= 0.0 || sb <= 0.0) throw ContractError("sinkhorn: all-zero input");

  Eigen::VectorXd a = a_in / sa, b = b_in / sb;
  double q = std::exp(-1.0 / reg);
  // debiased divergence: the raw entropic cost carries a self-transport bias
  // of roughly q*n even for identical inputs, so subtract the self terms;
  // this keeps d(x,x) = 0 and stays a smoothed total-variation analog.
  // cross cost averaged over both orders for exact symmetry at finite iters
  double cross = 0.5 * (entropic_cost(a, b, q, iters) +
                        entropic_cost(b, a, q, iters));
  double d = cross - 0.5 * (entropic_cost(a, a, q, iters) +
                            entropic_cost(b, b, q, iters));
  return std::clamp(d, 0.0, 1.0);
}

double sinkhorn_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         double reg, int iters) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ContractError("sinkhorn: shape mismatch");
  Eigen::VectorXd av = Eigen::Map<const Eigen::VectorXd>(a.data(), a.size());
  Eigen::VectorXd bv = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
  return sinkhorn_distance(av, bv, reg, iters);
}

std::vector<StateSample> sample_states(int n_states, std::uint64_t base_seed,
                                       const SimConfig& cfg) {
  if (n_states < 1) throw ContractError("sample_states: n_states < 1");
  std::vector<StateSample> out;
  out.reserve(n_states);
  for (std::uint64_t k = 0; static_cast<int>(out.size()) < n_states; ++k) {
    Scenario scen = generate(50, 6, derive_seed(base_seed, 0x57a7e000 + k));
    Rng rng(derive_seed(base_seed, 0x57a7e000 + k) ^ 0x9e37);
    WorldState w = init(scen);
    long long guard = 1000 + 100ll * 50 + 20ll * 6;
    for (long long step = 0; step < guard; ++step) {
      int robot = try_next_decider(w);
      if (robot < 0) break;
      advance_to_decision(w, scen, robot, cfg);
      bool any_edge = false;
      for (size_t r = 0; r < w.robots.size() && !any_edge; ++r)
        any_edge = !feasibility(w, scen, static_cast<int>(r), cfg).empty();
      if (any_edge) {
        out.push_back({scen, w, robot});
        if (static_cast<int>(out.size()) == n_states) break;
      }
      int action = feas_rnd(w, scen, robot, rng, cfg);
      if (action == 0 && w.robots[robot].at_depot) {
        w.robots[robot].parked = true;
        w.decision_log.push_back({w.clock, robot, 0});
      } else {
        apply(w, scen, robot, action, cfg);
      }
    }
  }
  return out;
}

std::vector<WeightComparison> checkpoint_divergence(
    const std::vector<CheckpointEntry>& checkpoints,
    const std::vector<StateSample>& states, double reg, int iters,
    const ExpertConfig& expert, const SimConfig& sim) {
  if (checkpoints.empty()) throw ContractError("no checkpoints given");
  if (states.empty()) throw ContractError("no states given");
  for (const auto& st : states)
    if (st.world.robots.size() != 6 || st.world.tasks.size() != 50)
      throw ContractError("states must come from 50-task/6-robot worlds");

  // per state: subset ids, the feasible-edge support and the expert vector
  struct Prepared {
    std::vector<int> robots, tasks;
    std::vector<std::pair<int, int>> support;  // (row, col) into the subsets
    Eigen::VectorXd expert_vec;
  };
  std::vector<Prepared> prep;
  prep.reserve(states.size());
  for (const auto& st : states) {
    Prepared p;
    auto [rsub, tsub] = shrink(st.world, st.scenario, st.decider, 6, 50, sim);
    p.robots = std::move(rsub);
    p.tasks = std::move(tsub);
    for (size_t r = 0; r < p.robots.size(); ++r) {
      auto feas = feasibility(st.world, st.scenario, p.robots[r], sim);
      for (size_t c = 0; c < p.tasks.size(); ++c)
        if (std::binary_search(feas.begin(), feas.end(), p.tasks[c]))
          p.support.emplace_back(static_cast<int>(r), static_cast<int>(c));
    }
    p.expert_vec.resize(static_cast<Eigen::Index>(p.support.size()));
    for (size_t k = 0; k < p.support.size(); ++k)
      p.expert_vec[static_cast<Eigen::Index>(k)] =
          expert_weight(p.robots[p.support[k].first],
                        p.tasks[p.support[k].second], st.world, st.scenario,
                        expert);
    prep.push_back(std::move(p));
  }

  std::vector<WeightComparison> out;
  for (const auto& cp : checkpoints) {
    auto t0 = std::chrono::steady_clock::now();
    WeightComparison wc;
    wc.checkpoint = cp.label;
    for (size_t i = 0; i < states.size(); ++i) {
      const Prepared& p = prep[i];
      if (p.support.empty() || p.expert_vec.sum() <= 0.0) continue;
      Eigen::VectorXd cand;
      if (cp.params == nullptr) {
        cand = p.expert_vec;
      } else {
        WeightDistributions d =
            weight_distributions(states[i].world, states[i].scenario,
                                 *cp.params, p.robots, p.tasks);
        Rng dummy(0);
        Eigen::MatrixXd w = sample_weights(d, SampleConfig{}, dummy);
        cand.resize(static_cast<Eigen::Index>(p.support.size()));
        for (size_t k = 0; k < p.support.size(); ++k)
          cand[static_cast<Eigen::Index>(k)] =
              w(p.support[k].first, p.support[k].second);
      }
      wc.distances.push_back(sinkhorn_distance(cand, p.expert_vec, reg, iters));
    }
    wc.n_states = static_cast<int>(wc.distances.size());
    if (wc.n_states == 0)
      throw ContractError("no comparable states (empty expert support)");
    wc.mean_distance = vec_mean(wc.distances);
    wc.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    out.push_back(std::move(wc));
  }
  return out;
}

std::string comparison_to_csv(const std::vector<WeightComparison>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "checkpoint,mean_sinkhorn,n_states\n";
  for (const auto& r : rows)
    os << r.checkpoint << ',' << r.mean_distance << ',' << r.n_states << '\n';
  return os.str();
}

}  // namespace mrta
