#include "mrta/policy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace mrta {

static_assert(std::endian::native == std::endian::little,
              "params file format is little-endian");

namespace {

void check_hyper(const PolicyHyper& hy) {
  if (hy.h < 1 || hy.P < 1 || hy.K < 1 || hy.L_e < 1 || hy.n_heads < 1)
    throw ContractError("policy: hyperparams must be >= 1");
  if (hy.h % hy.P != 0)
    throw ContractError("policy: h must be divisible by P");
  if (hy.h % hy.n_heads != 0)
    throw ContractError("policy: h must be divisible by n_heads");
}

int layer_in_width(const PolicyHyper& hy, int feature_width, int layer) {
  return layer == 0 ? feature_width : hy.h;
}

long long encoder_count(const PolicyHyper& hy, int feature_width) {
  long long c = 0;
  for (int l = 0; l < hy.L_e; ++l) {
    long long fin = layer_in_width(hy, feature_width, l);
    c += (hy.K + 1LL) * fin * hy.h + hy.h;
  }
  return c;
}

long long decoder_count(const PolicyHyper& hy) {
  return 6LL * hy.h * hy.h + 2LL * hy.h;
}

void fill_uniform(Eigen::MatrixXd& m, Rng& rng, double bound) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-bound, bound);
}

void fill_uniform(Eigen::VectorXd& v, Rng& rng, double bound) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(-bound, bound);
}

EncoderParams init_encoder(const PolicyHyper& hy, int feature_width, Rng& rng) {
  EncoderParams enc;
  enc.layers.resize(hy.L_e);
  for (int l = 0; l < hy.L_e; ++l) {
    EncoderLayerParams& lp = enc.layers[l];
    int fin = layer_in_width(hy, feature_width, l);
    double bound = 1.0 / std::sqrt(static_cast<double>(fin));
    int block = hy.h / hy.P;
    lp.w_pk.resize(static_cast<std::size_t>(hy.P) * hy.K);
    for (auto& wm : lp.w_pk) {
      wm.resize(fin, block);
      fill_uniform(wm, rng, bound);
    }
    lp.w_self.resize(fin, hy.h);
    fill_uniform(lp.w_self, rng, bound);
    lp.bias.resize(hy.h);
    fill_uniform(lp.bias, rng, bound);
  }
  return enc;
}

DecoderParams init_decoder(const PolicyHyper& hy, Rng& rng) {
  DecoderParams dec;
  double bound = 1.0 / std::sqrt(static_cast<double>(hy.h));
  for (Eigen::MatrixXd* m : {&dec.w_q, &dec.w_k, &dec.w_v, &dec.w_o, &dec.w_ff,
                             &dec.w_final}) {
    m->resize(hy.h, hy.h);
  }
  dec.b_ff.resize(hy.h);
  dec.b_final.resize(hy.h);
  fill_uniform(dec.w_q, rng, bound);
  fill_uniform(dec.w_k, rng, bound);
  fill_uniform(dec.w_v, rng, bound);
  fill_uniform(dec.w_o, rng, bound);
  fill_uniform(dec.w_ff, rng, bound);
  fill_uniform(dec.b_ff, rng, bound);
  fill_uniform(dec.w_final, rng, bound);
  fill_uniform(dec.b_final, rng, bound);
  return dec;
}

}  // namespace

long long param_count(const PolicyHyper& hy) {
  check_hyper(hy);
  return encoder_count(hy, kTaskFeatures) + encoder_count(hy, kRobotFeatures) +
         2 * decoder_count(hy);
}

PolicyParams init_params(const PolicyHyper& hy, std::uint64_t seed) {
  check_hyper(hy);
  PolicyParams p;
  p.hyper = hy;
  Rng rng(seed);
  p.task_enc = init_encoder(hy, kTaskFeatures, rng);
  p.robot_enc = init_encoder(hy, kRobotFeatures, rng);
  p.dec_mu = init_decoder(hy, rng);
  p.dec_sigma = init_decoder(hy, rng);
  return p;
}

namespace {

// canonical flatten order: task encoder layers (hop maps p-major, self map,
// bias), robot encoder, decoder-mu, decoder-sigma; matrices column-major
template <typename Fn>
void walk_tensors(PolicyParams& p, Fn&& fn) {
  for (EncoderParams* enc : {&p.task_enc, &p.robot_enc}) {
    for (auto& lp : enc->layers) {
      for (auto& wm : lp.w_pk) fn(wm.data(), wm.size());
      fn(lp.w_self.data(), lp.w_self.size());
      fn(lp.bias.data(), lp.bias.size());
    }
  }
  for (DecoderParams* dec : {&p.dec_mu, &p.dec_sigma}) {
    fn(dec->w_q.data(), dec->w_q.size());
    fn(dec->w_k.data(), dec->w_k.size());
    fn(dec->w_v.data(), dec->w_v.size());
    fn(dec->w_o.data(), dec->w_o.size());
    fn(dec->w_ff.data(), dec->w_ff.size());
    fn(dec->b_ff.data(), dec->b_ff.size());
    fn(dec->w_final.data(), dec->w_final.size());
    fn(dec->b_final.data(), dec->b_final.size());
  }
}

PolicyParams shaped_like(const PolicyHyper& hy) {
  PolicyParams p;
  p.hyper = hy;
  for (auto [enc, fw] :
       {std::pair{&p.task_enc, kTaskFeatures}, {&p.robot_enc, kRobotFeatures}}) {
    enc->layers.resize(hy.L_e);
    for (int l = 0; l < hy.L_e; ++l) {
      auto& lp = enc->layers[l];
      int fin = layer_in_width(hy, fw, l);
      lp.w_pk.assign(static_cast<std::size_t>(hy.P) * hy.K,
                     Eigen::MatrixXd::Zero(fin, hy.h / hy.P));
      lp.w_self = Eigen::MatrixXd::Zero(fin, hy.h);
      lp.bias = Eigen::VectorXd::Zero(hy.h);
    }
  }
  for (DecoderParams* dec : {&p.dec_mu, &p.dec_sigma}) {
    for (Eigen::MatrixXd* m :
         {&dec->w_q, &dec->w_k, &dec->w_v, &dec->w_o, &dec->w_ff, &dec->w_final})
      *m = Eigen::MatrixXd::Zero(hy.h, hy.h);
    dec->b_ff = Eigen::VectorXd::Zero(hy.h);
    dec->b_final = Eigen::VectorXd::Zero(hy.h);
  }
  return p;
}

}  // namespace

Eigen::VectorXd flatten(const PolicyParams& p) {
  Eigen::VectorXd v(param_count(p.hyper));
  Eigen::Index at = 0;
  walk_tensors(const_cast<PolicyParams&>(p),
               [&](double* data, Eigen::Index n) {
                 std::memcpy(v.data() + at, data, sizeof(double) * n);
                 at += n;
               });
  if (at != v.size()) throw ContractError("flatten: size bookkeeping broke");
  return v;
}

PolicyParams unflatten(const Eigen::VectorXd& v, const PolicyHyper& hy) {
  if (v.size() != param_count(hy))
    throw ContractError("unflatten: vector length does not match hyperparams");
  PolicyParams p = shaped_like(hy);
  Eigen::Index at = 0;
  walk_tensors(p, [&](double* data, Eigen::Index n) {
    std::memcpy(data, v.data() + at, sizeof(double) * n);
    at += n;
  });
  return p;
}

Eigen::MatrixXd gcaps_encode(const NodeGraph& g, const EncoderParams& enc,
                             const PolicyHyper& hy) {
  check_hyper(hy);
  if (static_cast<int>(enc.layers.size()) != hy.L_e)
    throw ContractError("gcaps_encode: layer count does not match L_e");
  if (enc.layers[0].w_self.rows() != g.features.cols())
    throw ContractError("gcaps_encode: params do not match graph feature width");
  const Eigen::Index n = g.features.rows();
  // row-normalized adjacency; diagonal degrees are >= 1 (self-similarity is 1)
  Eigen::MatrixXd a_hat = g.adjacency;
  for (Eigen::Index i = 0; i < n; ++i) a_hat.row(i) /= g.degree(i, i);

  const int block = hy.h / hy.P;
  Eigen::MatrixXd x = g.features;
  for (int l = 0; l < hy.L_e; ++l) {
    const EncoderLayerParams& lp = enc.layers[l];
    // column z-score (population std) feeding the moment powers
    Eigen::MatrixXd xs = x;
    for (Eigen::Index c = 0; c < xs.cols(); ++c) {
      double mean = xs.col(c).mean();
      double var = (xs.col(c).array() - mean).square().sum() / n;
      xs.col(c) = (xs.col(c).array() - mean) / (std::sqrt(var) + 1e-8);
    }
    Eigen::MatrixXd out(n, hy.h);
    for (int p = 0; p < hy.P; ++p) {
      Eigen::MatrixXd mp = xs.array().pow(p + 1).matrix();
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, block);
      Eigen::MatrixXd y = mp;
      for (int k = 0; k < hy.K; ++k) {
        y = a_hat * y;  // k+1 hops of propagation
        acc.noalias() += y * lp.w_pk[static_cast<std::size_t>(p) * hy.K + k];
      }
      out.middleCols(static_cast<Eigen::Index>(p) * block, block) = acc;
    }
    out.noalias() += x * lp.w_self;
    out.rowwise() += lp.bias.transpose();
    x = out.array().tanh().matrix();
  }
  return x;
}

namespace {

void softmax_rows(Eigen::MatrixXd& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    double m = s.row(i).maxCoeff();
    s.row(i) = (s.row(i).array() - m).exp();
    s.row(i) /= s.row(i).sum();
  }
}

}  // namespace

Eigen::MatrixXd mha_decode(const Eigen::MatrixXd& task_emb,
                           const Eigen::MatrixXd& robot_emb,
                           const DecoderParams& dec, const PolicyHyper& hy) {
  if (task_emb.cols() != hy.h || robot_emb.cols() != hy.h)
    throw ContractError("mha_decode: embedding width does not match h");
  const Eigen::Index dk = hy.h / hy.n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  Eigen::MatrixXd q = robot_emb * dec.w_q;
  Eigen::MatrixXd k = task_emb * dec.w_k;
  Eigen::MatrixXd v = task_emb * dec.w_v;
  Eigen::MatrixXd c(robot_emb.rows(), hy.h);
  for (int head = 0; head < hy.n_heads; ++head) {
    Eigen::Index off = head * dk;
    Eigen::MatrixXd s = q.middleCols(off, dk) * k.middleCols(off, dk).transpose();
    s *= scale;
    softmax_rows(s);
    c.middleCols(off, dk) = s * v.middleCols(off, dk);
  }
  Eigen::MatrixXd o = c * dec.w_o;
  Eigen::MatrixXd g =
      ((o * dec.w_ff).rowwise() + dec.b_ff.transpose()).array().tanh().matrix();
  Eigen::MatrixXd task_side =
      (task_emb * dec.w_final).rowwise() + dec.b_final.transpose();
  return g * task_side.transpose();
}

WeightDistributions weight_distributions(const WorldState& w, const Scenario& s,
                                         const PolicyParams& params,
                                         const std::vector<int>& robot_indices,
                                         const std::vector<int>& task_ids,
                                         const GraphConfig& gcfg) {
  TaskGraph tg = build_task_subgraph(w, s, task_ids, gcfg);
  RobotGraph rg = build_robot_subgraph(w, s, robot_indices, gcfg);
  Eigen::MatrixXd ft = gcaps_encode(tg, params.task_enc, params.hyper);
  Eigen::MatrixXd fr = gcaps_encode(rg, params.robot_enc, params.hyper);
  WeightDistributions d;
  d.mu = mha_decode(ft, fr, params.dec_mu, params.hyper);
  Eigen::MatrixXd raw = mha_decode(ft, fr, params.dec_sigma, params.hyper);
  // stable softplus plus a floor keeps every sigma strictly positive
  d.sigma = raw.unaryExpr([](double x) {
    double sp = x > 30.0 ? x : std::log1p(std::exp(x));
    return sp + kSigmaFloor;
  });
  return d;
}

WeightDistributions weight_distributions(const WorldState& w, const Scenario& s,
                                         const PolicyParams& params,
                                         const GraphConfig& gcfg) {
  std::vector<int> robots(w.robots.size()), tasks(w.tasks.size());
  for (std::size_t i = 0; i < robots.size(); ++i) robots[i] = static_cast<int>(i);
  for (std::size_t i = 0; i < tasks.size(); ++i) tasks[i] = static_cast<int>(i) + 1;
  return weight_distributions(w, s, params, robots, tasks, gcfg);
}

Eigen::MatrixXd sample_weights(const WeightDistributions& d,
                               const SampleConfig& cfg, Rng& rng) {
  if (d.mu.rows() != d.sigma.rows() || d.mu.cols() != d.sigma.cols())
    throw ContractError("sample_weights: mu/sigma shape mismatch");
  Eigen::MatrixXd w(d.mu.rows(), d.mu.cols());
  if (cfg.mode == SampleMode::test) {
    // scalar std::exp keeps test-mode weights bit-identical to the train-mode
    // non-explored entries (Eigen's vectorized exp can differ in the last ulp)
    if (cfg.greedy_mean)
      w = (d.mu.array() + 0.5 * d.sigma.array().square())
              .unaryExpr([](double x) { return std::exp(x); });
    else
      w = d.mu.unaryExpr([](double x) { return std::exp(x); });
    return w;
  }
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index t = 0; t < w.cols(); ++t) {
      if (rng.uniform() < cfg.epsilon)
        w(r, t) = std::exp(rng.normal(d.mu(r, t), d.sigma(r, t)));
      else
        w(r, t) = std::exp(d.mu(r, t));
    }
  }
  return w;
}

std::pair<std::vector<int>, std::vector<int>> shrink(const WorldState& w,
                                                     const Scenario& s,
                                                     int deciding_robot,
                                                     int max_robots, int max_tasks,
                                                     const SimConfig& cfg) {
  const int nr = static_cast<int>(w.robots.size());
  const int nt = static_cast<int>(w.tasks.size());
  const Point origin = w.robots.at(deciding_robot).dest;

  std::vector<int> rsub;
  if (nr <= max_robots) {
    rsub.resize(nr);
    for (int r = 0; r < nr; ++r) rsub[r] = r;
  } else {
    std::vector<std::pair<double, int>> order;
    order.reserve(nr - 1);
    for (int r = 0; r < nr; ++r) {
      if (r == deciding_robot) continue;
      order.emplace_back(dist(w.robots[r].dest, origin), r);
    }
    std::sort(order.begin(), order.end());
    rsub.push_back(deciding_robot);
    for (int k = 0; k < max_robots - 1; ++k) rsub.push_back(order[k].second);
    std::sort(rsub.begin(), rsub.end());
  }

  std::vector<int> tsub;
  if (nt <= max_tasks) {
    tsub.resize(nt);
    for (int t = 0; t < nt; ++t) tsub[t] = t + 1;
  } else {
    auto task_dist = [&](int id) {
      return dist({s.tasks[id - 1].x, s.tasks[id - 1].y}, origin);
    };
    std::vector<int> feas = feasibility(w, s, deciding_robot, cfg);
    std::vector<char> in_feas(nt + 1, 0);
    for (int id : feas) in_feas[id] = 1;
    std::vector<std::pair<double, int>> order;
    order.reserve(feas.size());
    for (int id : feas) order.emplace_back(task_dist(id), id);
    std::sort(order.begin(), order.end());
    for (int k = 0; k < static_cast<int>(order.size()) && k < max_tasks; ++k)
      tsub.push_back(order[k].second);
    if (static_cast<int>(tsub.size()) < max_tasks) {
      // pad with the nearest remaining tasks so the bigraph shape stays fixed
      std::vector<std::pair<double, int>> rest;
      rest.reserve(nt - tsub.size());
      for (int id = 1; id <= nt; ++id)
        if (!in_feas[id]) rest.emplace_back(task_dist(id), id);
      std::sort(rest.begin(), rest.end());
      for (std::size_t k = 0;
           k < rest.size() && static_cast<int>(tsub.size()) < max_tasks; ++k)
        tsub.push_back(rest[k].second);
    }
    std::sort(tsub.begin(), tsub.end());
  }
  return {rsub, tsub};
}

namespace {

constexpr char kMagic[8] = {'B', 'G', 'C', 'A', 'M', 'P', 'R', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::ifstream& in, const std::string& path) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
    throw IoError("params file truncated: " + path);
  return v;
}
std::uint64_t read_u64(std::ifstream& in, const std::string& path) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
    throw IoError("params file truncated: " + path);
  return v;
}

}  // namespace

void save_params(const PolicyParams& p, const std::string& path) {
  Eigen::VectorXd v = flatten(p);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kFormatVersion);
  write_u32(out, static_cast<std::uint32_t>(p.hyper.h));
  write_u32(out, static_cast<std::uint32_t>(p.hyper.P));
  write_u32(out, static_cast<std::uint32_t>(p.hyper.K));
  write_u32(out, static_cast<std::uint32_t>(p.hyper.L_e));
  write_u32(out, static_cast<std::uint32_t>(p.hyper.n_heads));
  write_u64(out, static_cast<std::uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(sizeof(double) * v.size()));
  if (!out) throw IoError("write failed: " + path);
}

PolicyParams load_params(const std::string& path, const PolicyHyper* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError("params file has wrong magic: " + path);
  std::uint32_t version = read_u32(in, path);
  if (version != kFormatVersion)
    throw IoError("params file version " + std::to_string(version) +
                  " unsupported: " + path);
  PolicyHyper hy;
  hy.h = static_cast<int>(read_u32(in, path));
  hy.P = static_cast<int>(read_u32(in, path));
  hy.K = static_cast<int>(read_u32(in, path));
  hy.L_e = static_cast<int>(read_u32(in, path));
  hy.n_heads = static_cast<int>(read_u32(in, path));
  if (expected &&
      (hy.h != expected->h || hy.P != expected->P || hy.K != expected->K ||
       hy.L_e != expected->L_e || hy.n_heads != expected->n_heads))
    throw IoError("params file hyperparams do not match the requested config: " +
                  path);
  std::uint64_t count = read_u64(in, path);
  if (count != static_cast<std::uint64_t>(param_count(hy)))
    throw IoError("params file vector length does not match hyperparams: " + path);
  Eigen::VectorXd v(static_cast<Eigen::Index>(count));
  if (!in.read(reinterpret_cast<char*>(v.data()),
               static_cast<std::streamsize>(sizeof(double) * count)))
    throw IoError("params file truncated: " + path);
  return unflatten(v, hy);
}

int BigCamAllocator::decide(const WorldState& w, const Scenario& s,
                            int robot) const {
  auto [rsub, tsub] =
      shrink(w, s, robot, cfg_.shrink_robots, cfg_.shrink_tasks, cfg_.sim);
  WeightDistributions d =
      weight_distributions(w, s, *params_, rsub, tsub, cfg_.graph);
  Eigen::MatrixXd weights = sample_weights(d, cfg_.sample, rng_);
  WeightedBigraph bg = bigraph_from_matrix(w, s, rsub, tsub, weights, cfg_.sim);
  Matching m = hungarian_max(bg);
  return action_for(bg, m, robot);
}

}  // namespace mrta
