#include "mrta/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mrta {

namespace {

// classical Kuhn-Munkres on a square min-cost matrix, O(n^3), keeping the
// dual potentials: u[i] + v[j] <= cost(i,j) everywhere, tight on matches
struct KmResult {
  std::vector<int> col_to_row;  // p[j], -1 when unmatched (never at the end)
  std::vector<double> u, v;
};

KmResult km_min_cost(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const double inf = std::numeric_limits<double>::infinity();
  KmResult res;
  res.u.assign(n + 1, 0.0);
  res.v.assign(n + 1, 0.0);
  std::vector<int> p(n + 1, -1), way(n + 1, n);
  std::vector<double> minv(n + 1);
  std::vector<char> used(n + 1);
  for (int i = 0; i < n; ++i) {
    p[n] = i;
    int j0 = n;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = -1;
      double delta = inf;
      for (int j = 0; j < n; ++j) {
        if (used[j]) continue;
        double cur = a(i0, j) - res.u[i0] - res.v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          res.u[p[j]] += delta;
          res.v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != -1);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != n);
  }
  p.pop_back();
  res.col_to_row = std::move(p);
  return res;
}

// padded square cost matrix: real rows/cols carry -w (or the forbidden
// sentinel), dummy rows/cols are free so unmatching costs nothing
Eigen::MatrixXd padded_cost(const WeightedBigraph& bg, double big) {
  const int nr = static_cast<int>(bg.weights.rows());
  const int nt = static_cast<int>(bg.weights.cols());
  const int n = nr + nt;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int r = 0; r < nr; ++r)
    for (int t = 0; t < nt; ++t)
      a(r, t) = bg.mask(r, t) ? -bg.weights(r, t) : big;
  return a;
}

// the forbidden sentinel: a power of two above any achievable |objective|,
// dyadic so lattice-valued weights keep all KM arithmetic exact
double big_sentinel(const WeightedBigraph& bg, int n) {
  double maxw = 0.0;
  for (int r = 0; r < bg.weights.rows(); ++r)
    for (int t = 0; t < bg.weights.cols(); ++t)
      if (bg.mask(r, t)) maxw = std::max(maxw, bg.weights(r, t));
  double big = 1.0;
  while (big < (maxw + 1.0) * (n + 1)) big *= 2.0;
  return big;
}

void validate_weights(const WeightedBigraph& bg) {
  if (bg.weights.rows() != bg.mask.rows() || bg.weights.cols() != bg.mask.cols())
    throw ContractError("bigraph: weight/mask shape mismatch");
  for (int r = 0; r < bg.weights.rows(); ++r)
    for (int t = 0; t < bg.weights.cols(); ++t)
      if (bg.mask(r, t) &&
          (!std::isfinite(bg.weights(r, t)) || bg.weights(r, t) < 0.0))
        throw ContractError("bigraph: unmasked weight must be finite and >= 0");
}

// max-weight objective of a sub-bigraph (sel_rows x sel_cols), no tie handling
double km_objective(const WeightedBigraph& bg, const std::vector<int>& sel_rows,
                    const std::vector<int>& sel_cols, double big) {
  const int nr = static_cast<int>(sel_rows.size());
  const int nt = static_cast<int>(sel_cols.size());
  if (nr == 0 || nt == 0) return 0.0;
  const int n = nr + nt;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int r = 0; r < nr; ++r)
    for (int t = 0; t < nt; ++t)
      a(r, t) =
          bg.mask(sel_rows[r], sel_cols[t]) ? -bg.weights(sel_rows[r], sel_cols[t]) : big;
  KmResult km = km_min_cost(a);
  double obj = 0.0;
  for (int t = 0; t < nt; ++t) {
    int r = km.col_to_row[t];
    if (r < nr && bg.mask(sel_rows[r], sel_cols[t]))
      obj += bg.weights(sel_rows[r], sel_cols[t]);
  }
  return obj;
}

}  // namespace

Matching hungarian_max(const WeightedBigraph& bg) {
  validate_weights(bg);
  const int nr = static_cast<int>(bg.weights.rows());
  const int nt = static_cast<int>(bg.weights.cols());
  Matching out;
  if (nr == 0 || nt == 0) return out;
  const int n = nr + nt;
  const double big = big_sentinel(bg, n);
  KmResult km = km_min_cost(padded_cost(bg, big));

  std::vector<int> km_pair(nr, -1);  // row -> col in km's own optimum
  double opt = 0.0;
  for (int t = 0; t < nt; ++t) {
    int r = km.col_to_row[t];
    if (r >= 0 && r < nr) {
      if (!bg.mask(r, t))
        throw ContractError("hungarian: optimum used a forbidden edge");
      km_pair[r] = t;
      opt += bg.weights(r, t);
    }
  }

  // lexicographic refinement: fix robots in ascending order, preferring the
  // smallest task that still allows a maximum-weight completion; once the
  // optimum is already met the remaining robots stay unmatched (a shorter
  // pair sequence orders before any extension)
  const double tol = 1e-9 * (1.0 + std::abs(opt));
  double need = opt;
  std::vector<char> used_col(nt, 0);
  bool km_prefix = true;  // fixed prefix equals km's own choices so far
  for (int r = 0; r < nr && need > tol; ++r) {
    int chosen = -1;
    std::vector<int> rest_rows, rest_cols;
    for (int t = 0; t < nt; ++t) {
      if (used_col[t] || !bg.mask(r, t)) continue;
      // only dual-tight edges can appear in any maximum-weight completion
      if (std::abs(km.u[r] + km.v[t] + bg.weights(r, t)) > tol) continue;
      if (km_prefix && km_pair[r] == t) {
        chosen = t;  // km's own completion certifies this candidate
        break;
      }
      if (rest_rows.empty()) {
        for (int rr = r + 1; rr < nr; ++rr) rest_rows.push_back(rr);
      }
      rest_cols.clear();
      for (int tt = 0; tt < nt; ++tt)
        if (!used_col[tt] && tt != t) rest_cols.push_back(tt);
      double rest = km_objective(bg, rest_rows, rest_cols, big);
      if (bg.weights(r, t) + rest >= need - tol) {
        chosen = t;
        break;
      }
    }
    if (chosen >= 0) {
      out.pairs.emplace_back(r, chosen);
      used_col[chosen] = 1;
      need -= bg.weights(r, chosen);
      if (km_pair[r] != chosen) km_prefix = false;
    } else if (km_pair[r] != -1) {
      km_prefix = false;
    }
  }
  out.objective = 0.0;
  for (const auto& [r, t] : out.pairs) out.objective += bg.weights(r, t);
  return out;
}

WeightedBigraph build_bigraph(const WorldState& w, const Scenario& s,
                              const WeightFn& fn, const SimConfig& cfg) {
  const int nr = static_cast<int>(w.robots.size());
  const int nt = static_cast<int>(w.tasks.size());
  WeightedBigraph bg;
  bg.weights = Eigen::MatrixXd::Zero(nr, nt);
  bg.mask.setConstant(nr, nt, false);
  bg.robot_ids.resize(nr);
  bg.task_ids.resize(nt);
  for (int t = 0; t < nt; ++t) bg.task_ids[t] = t + 1;
  for (int r = 0; r < nr; ++r) {
    bg.robot_ids[r] = r;
    for (int id : feasibility(w, s, r, cfg)) {
      double v = fn(r, id, w);
      if (!std::isfinite(v) || v < 0.0)
        throw ContractError("build_bigraph: weight_fn returned negative or non-finite");
      bg.weights(r, id - 1) = v;
      bg.mask(r, id - 1) = true;
    }
  }
  return bg;
}

WeightedBigraph bigraph_from_matrix(const WorldState& w, const Scenario& s,
                                    const std::vector<int>& robot_indices,
                                    const std::vector<int>& task_ids,
                                    const Eigen::MatrixXd& weights,
                                    const SimConfig& cfg) {
  const int nr = static_cast<int>(robot_indices.size());
  const int nt = static_cast<int>(task_ids.size());
  if (weights.rows() != nr || weights.cols() != nt)
    throw ContractError("bigraph_from_matrix: weight shape mismatch");
  WeightedBigraph bg;
  bg.weights = Eigen::MatrixXd::Zero(nr, nt);
  bg.mask.setConstant(nr, nt, false);
  bg.robot_ids = robot_indices;
  bg.task_ids = task_ids;
  for (int r = 0; r < nr; ++r) {
    auto feas = feasibility(w, s, robot_indices[r], cfg);
    for (int t = 0; t < nt; ++t) {
      if (!std::binary_search(feas.begin(), feas.end(), task_ids[t])) continue;
      double v = weights(r, t);
      if (!std::isfinite(v) || v < 0.0)
        throw ContractError("bigraph_from_matrix: weight must be finite and >= 0");
      bg.weights(r, t) = v;
      bg.mask(r, t) = true;
    }
  }
  return bg;
}

int action_for(const WeightedBigraph& bg, const Matching& m, int robot_index) {
  for (const auto& [r, t] : m.pairs)
    if (bg.robot_ids[r] == robot_index) return bg.task_ids[t];
  return 0;
}

int decide(const WorldState& w, const Scenario& s, const WeightFn& fn,
           int deciding_robot, const SimConfig& cfg) {
  WeightedBigraph bg = build_bigraph(w, s, fn, cfg);
  Matching m = hungarian_max(bg);
  return action_for(bg, m, deciding_robot);
}

int feas_rnd(const WorldState& w, const Scenario& s, int deciding_robot,
             Rng& rng, const SimConfig& cfg) {
  auto feas = feasibility(w, s, deciding_robot, cfg);
  if (feas.empty()) return 0;
  auto k = rng.uniform_int(0, static_cast<long long>(feas.size()) - 1);
  return feas[static_cast<std::size_t>(k)];
}

}  // namespace mrta
