#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "macdisp/dispersion.hpp"
#include "macdisp/model.hpp"
#include "macdisp/montecarlo.hpp"
#include "macdisp/rng.hpp"

namespace testutil {

// Row-stochastic channel with strictly positive entries (exponential rows).
macdisp::Channel random_channel(macdisp::CounterRng& rng, int nx1, int nx2, int ny);

// Input spec with strictly positive rows; nu = 0 gives the single-row form.
macdisp::InputSpec random_inputs(macdisp::CounterRng& rng, int nx1, int nx2, int nu);

// Composition of n over `symbols` symbols drawn by multinomial sampling; may
// contain zero counts.
macdisp::Composition random_composition(macdisp::CounterRng& rng, int symbols, int n);

// Mutual informations (I1, I2, I12) from conditional-entropy differences,
// sharing no code with the density-based path.
Eigen::Vector3d entropy_mi(const macdisp::JointLaw& j);

struct BruteMoments {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
};

// Exact mean/covariance of the summed density vector by enumerating every
// permutation pair of every u block and every output sequence.  Feasible for
// block lengths up to ~5 on small alphabets; pass the realized law of `cfg`.
BruteMoments brute_force_moments(const macdisp::JointLaw& j, const macdisp::InfoDensity& d,
                                 const macdisp::SimConfig& cfg);

// Frozen upper 0.999 quantiles of the chi-square distribution for the degrees
// of freedom used by the uniformity tests; throws on any other df.
double chi2_quantile_999(int df);

// E[X^k] for X standard normal: 0 for odd k, (k-1)!! for even k.
double normal_moment(int k);

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys);

// P[S g <= z componentwise] for iid standard normal g, by direct simulation.
double mc_orthant(const Eigen::Matrix<double, 3, Eigen::Dynamic>& support_sqrt,
                  const Eigen::Vector3d& z, std::uint64_t samples, std::uint64_t seed);

// Fresh temporary directory (mkdtemp under /tmp).
std::string temp_dir();

}  // namespace testutil
