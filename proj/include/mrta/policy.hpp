#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mrta/graphs.hpp"
#include "mrta/matching.hpp"
#include "mrta/rng.hpp"
#include "mrta/sim.hpp"

namespace mrta {

inline constexpr double kSigmaFloor = 1e-3;
inline constexpr int kTaskFeatures = 4;
inline constexpr int kRobotFeatures = 5;

struct PolicyHyper {
  int h = 128;      // embedding width
  int P = 4;        // statistical moments
  int K = 3;        // propagation hops
  int L_e = 1;      // encoder layers
  int n_heads = 8;  // attention heads (1 also supported)
};

// one GCAPS layer: per-moment hop maps W[p*K+k] (F_in x h/P), a self map and a
// bias. the concat runs over moments only; hops are summed inside a moment so
// the h/P block width is integral for the default (h=128, P=4, K=3)
struct EncoderLayerParams {
  std::vector<Eigen::MatrixXd> w_pk;  // P*K entries, p-major
  Eigen::MatrixXd w_self;             // F_in x h
  Eigen::VectorXd bias;               // h
};

struct EncoderParams {
  std::vector<EncoderLayerParams> layers;
};

struct DecoderParams {
  Eigen::MatrixXd w_q, w_k, w_v;  // h x h, query from robots, key/value from tasks
  Eigen::MatrixXd w_o;            // h x h, head-concat projection
  Eigen::MatrixXd w_ff;           // h x h, feed-forward to G
  Eigen::VectorXd b_ff;           // h
  Eigen::MatrixXd w_final;        // h x h, task-side map in M = G (F^T W_final + b)^T
  Eigen::VectorXd b_final;        // h
};

struct PolicyParams {
  PolicyHyper hyper;
  EncoderParams task_enc, robot_enc;
  DecoderParams dec_mu, dec_sigma;
};

struct WeightDistributions {
  Eigen::MatrixXd mu;     // N^R x N^T
  Eigen::MatrixXd sigma;  // same shape, >= kSigmaFloor
};

enum class SampleMode { train, test };

struct SampleConfig {
  SampleMode mode = SampleMode::test;
  double epsilon = 0.2;      // per-entry exploration probability in train mode
  bool greedy_mean = false;  // test weight exp(mu + sigma^2/2) instead of exp(mu)
};

long long param_count(const PolicyHyper& hyper);
PolicyParams init_params(const PolicyHyper& hyper, std::uint64_t seed);

Eigen::VectorXd flatten(const PolicyParams& p);
PolicyParams unflatten(const Eigen::VectorXd& v, const PolicyHyper& hyper);

Eigen::MatrixXd gcaps_encode(const NodeGraph& g, const EncoderParams& enc,
                             const PolicyHyper& hyper);
Eigen::MatrixXd mha_decode(const Eigen::MatrixXd& task_emb,
                           const Eigen::MatrixXd& robot_emb,
                           const DecoderParams& dec, const PolicyHyper& hyper);

WeightDistributions weight_distributions(const WorldState& w, const Scenario& s,
                                         const PolicyParams& params,
                                         const GraphConfig& gcfg = {});
// subset variant used after shrinking; rows/cols follow the subset order
WeightDistributions weight_distributions(const WorldState& w, const Scenario& s,
                                         const PolicyParams& params,
                                         const std::vector<int>& robot_indices,
                                         const std::vector<int>& task_ids,
                                         const GraphConfig& gcfg = {});

// rng is consumed row-major (train mode); test mode never touches it
Eigen::MatrixXd sample_weights(const WeightDistributions& d,
                               const SampleConfig& cfg, Rng& rng);

// proximity shrink to at most (max_robots x max_tasks); the deciding robot is
// always kept, task slots prefer the decider's feasible tasks and are padded
// with the nearest remaining tasks to keep the shape fixed
std::pair<std::vector<int>, std::vector<int>> shrink(
    const WorldState& w, const Scenario& s, int deciding_robot,
    int max_robots = 6, int max_tasks = 50, const SimConfig& cfg = {});

void save_params(const PolicyParams& p, const std::string& path);
PolicyParams load_params(const std::string& path,
                         const PolicyHyper* expected = nullptr);

struct BigCamConfig {
  SampleConfig sample;
  int shrink_robots = 6;
  int shrink_tasks = 50;
  GraphConfig graph;
  SimConfig sim;
};

// learned-incentive allocator; params must outlive the allocator and stay
// immutable (shared read-only across concurrent episodes)
struct BigCamAllocator final : Allocator {
  BigCamAllocator(const PolicyParams& params, BigCamConfig cfg = {},
                  std::uint64_t rng_seed = 0)
      : params_(&params), cfg_(cfg), rng_(rng_seed) {}
  int decide(const WorldState& w, const Scenario& s, int robot) const override;

 private:
  const PolicyParams* params_;
  BigCamConfig cfg_;
  mutable Rng rng_;  // only consumed in train mode
};

}  // namespace mrta
