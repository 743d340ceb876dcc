#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "macdisp/dispersion.hpp"
#include "macdisp/model.hpp"
#include "macdisp/rng.hpp"

namespace macdisp {

// A simulation plan: per-u blocks of the (sorted) time-sharing sequence, one
// composition per user per block.  An empty `u_comp` means no time sharing and
// a single block of length n.
struct SimConfig {
  int n = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  int workers = 1;
  Composition u_comp;
  std::vector<Composition> comp1;
  std::vector<Composition> comp2;
};

// Rounds (q_u, q1, q2) to compositions via nearest_type: first the u blocks,
// then each user's composition within its block.
SimConfig make_sim_config(const JointLaw& j, int n, std::uint64_t trials,
                          std::uint64_t seed, int workers = 1);

// Input law actually sampled by `cfg`: block weights n_u/n, per-block symbol
// frequencies count/n_u.  Integral by construction, so finite-blocklength
// moment formulas apply to it exactly.
JointLaw realized_law(const Channel& ch, const SimConfig& cfg);

struct TailEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
};

struct MomentEstimate {
  Eigen::Vector3d mean;
  Eigen::Vector3d mean_std_error;
  Eigen::Matrix3d cov;
  Eigen::Matrix3d cov_std_error;
  std::uint64_t trials = 0;
};

struct PeBound {
  double bound = 1.0;           // clamped to [0,1]
  TailEstimate joint_success;   // P[all three density sums exceed gamma]
  double gaussian_success = 0;  // same probability under the normal surrogate
  Eigen::Vector3d gamma;
  double penalty = 0.0;         // p0(n) * sum of the three threshold terms
  int poly_degree = 0;          // d in p0(n) = (n+1)^d
};

// Uniform draw from the type class of `comp`: sorted base arrangement followed
// by an unbiased index-swap shuffle consuming `rng` in a fixed order.
std::vector<int> sample_type_class(const Composition& comp, CounterRng& rng);

// Sample mean/covariance of the per-block density sums, with standard errors
// (fourth-moment based for the covariance entries).
MomentEstimate empirical_in_moments(const Channel& ch, const InputSpec& inp,
                                    const SimConfig& cfg);

// P[density sum of component `which` (1, 2, or 12) > gamma] where the scored
// codewords follow the pairing for that component: user 1 resampled for 1,
// user 2 for 2, both for 12; the output stays tied to the transmitted pair.
TailEstimate excess_prob(const Channel& ch, const InputSpec& inp,
                         const SimConfig& cfg, int which, double gamma);

// Threshold union bound at rates (r1, r2) nats/use: thresholds
// gamma_v = n*R_v + (d + 1/2) log n, bound = 1 - P[sums > gamma] + penalty,
// with the success probability both simulated and evaluated under the
// normal surrogate for cross-checking.
PeBound pe_upper_bound(const Channel& ch, const InputSpec& inp,
                       const SimConfig& cfg, double r1, double r2);

// Max over a fixed grid of lower-orthant corners (11 per retained axis,
// spanning [-2.5, 2.5]) of |empirical CDF of the standardized sum - product
// of normal CDFs|.  The default basis restricts to the support of the
// finite-n covariance; a rank-0 support gives distance 0.
double clt_distance(const Channel& ch, const InputSpec& inp,
                    const SimConfig& cfg);
double clt_distance(const Channel& ch, const InputSpec& inp,
                    const SimConfig& cfg,
                    const Eigen::Matrix<double, 3, Eigen::Dynamic>& basis);

}  // namespace macdisp
